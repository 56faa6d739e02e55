"""Dispersion curves and the minimal front speed c* = inf mu(lambda)/lambda.

Run:  python demos/04_dispersion_and_speed.py
"""

import io

import numpy as np

from frontspeed import fields as F
from frontspeed.dispersion import (Dispersion, convexity_check, lambda_for_speed,
                                   minimal_speed, regularized_minimal_speed, sample_curve)

grid = F.CellGrid(2, 16, 128)
k = (1.0, 0.0)
cell = F.cellular(1.0)

curve = sample_curve(cell, 1.0, k, np.linspace(0.25, 3.0, 17), grid)
buf = io.StringIO()
curve.to_csv(buf, comment="cellular A=1, 16^2 x 128")
print(buf.getvalue().splitlines()[:6], "...")
print("convexity:", convexity_check(curve))

# The same search on the zero flow recovers the classical 2 sqrt(r).
for r in (1.0, 0.25):
    res = minimal_speed(F.zero(1), r, (1.0,), F.CellGrid(1, 8, 16))
    print(f"\nzero flow, r={r}: c* = {res.c_star:.9f}, lambda* = {res.lambda_star:.6f}")

disp = Dispersion(cell, 1.0, k, grid, tol=1e-11)
res = minimal_speed(None, 1.0, k, grid, tol_c=1e-7, dispersion=disp)
print(f"\ncellular A=1: c* = {res.c_star:.6f} at lambda* = {res.lambda_star:.6f} "
      f"({res.iterations} golden-section probes)")

# Faster fronts are selected by slower exponential decay lambda_c < lambda*.
for factor in (1.05, 1.25, 1.5):
    c = factor * res.c_star
    print(f"c = {c:.4f}: lambda_c = {lambda_for_speed(disp, res, c):.6f}")

# Adding eps d_ss to the operator raises the speed, and c*_eps decreases to c*.
print("\neps     c*_eps")
for eps in (0.5, 0.1, 0.01, 0.0):
    reg = regularized_minimal_speed(None, 1.0, k, grid, eps, tol_c=1e-7, dispersion=disp)
    print(f"{eps:<6g}  {reg.c_star:.6f}")
