"""Periodic incompressible flows and the checks that admit them.

Run:  python demos/01_flow_fields.py
"""

import numpy as np

from frontspeed import fields as F

grid = F.CellGrid(dim=2, n_x=64, n_t=64)

# Three analytic families.  The cellular flow comes from a stream function,
# so its divergence vanishes identically; the shear flow only depends on x2.
flows = {
    "zero": F.zero(),
    "shear A=1": F.shear(1.0),
    "cellular A=1": F.cellular(1.0),
    "cellular A=1, eps_t=0.5": F.cellular(1.0, eps_t=0.5),
}
for name, spec in flows.items():
    div = F.divergence_residual(spec, grid)
    mean = F.mean_residual(spec, grid)
    print(f"{name:26s} sup|div b| = {div:.1e}   |<b>| = {mean.max():.1e}   "
          f"sup|b| = {spec.sup_norm():.3f}")

# Point evaluation; b is 1-periodic in x and t.
cell = flows["cellular A=1, eps_t=0.5"]
print("\nb(0.1, 0.3, t=0.2)      =", F.evaluate(cell, (0.1, 0.3), 0.2))
print("b(1.1, -0.7, t=3.2)     =", F.evaluate(cell, (1.1, -0.7), 3.2))

# A tabulated field is trilinearly interpolated with wraparound.  Adding a
# compressible component shows up at once in the divergence residual.
data = F.tabulate(F.cellular(1.0), 32, 16)
print("\ntabulated copy:  sup|div b| =",
      f"{F.divergence_residual(F.tabulated(data), F.CellGrid(2, 32, 16)):.1e}")
x = np.arange(32) / 32
data[..., 0] += (np.sin(2 * np.pi * x) / (2 * np.pi))[None, :, None]
print("with sin(2 pi x1)/(2 pi) added to b1:  sup|div b| =",
      f"{F.divergence_residual(F.tabulated(data), F.CellGrid(2, 32, 16)):.3f}")
