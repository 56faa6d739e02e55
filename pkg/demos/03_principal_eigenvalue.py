"""The principal eigenvalue mu(lambda) by power iteration on the period map.

Run:  python demos/03_principal_eigenvalue.py
"""

import numpy as np

from frontspeed import fields as F
from frontspeed.eigensolver import (EigenProblem, eigenfunction_slices,
                                    integral_identity_residual, principal_eigenvalue,
                                    rayleigh_upper_bound, shift_identities_check)

k = (1.0, 0.0)
field = F.cellular(1.0, eps_t=0.5)

# With no flow mu(lambda) = lambda^2 + r exactly.
zero = principal_eigenvalue(EigenProblem(F.zero(), 1.0, k, 1.0, F.CellGrid(2, 16, 64)))
print(f"zero flow, lambda=1: mu = {zero.mu:.12f} after {zero.iterations} periods")

# Refining the cell grid: the values settle to about 1e-8.
for n, n_t in ((16, 128), (32, 256), (64, 512)):
    res = principal_eigenvalue(EigenProblem(field, 1.0, k, 1.0, F.CellGrid(2, n, n_t)))
    print(f"cellular A=1 eps_t=0.5, {n}^2 x {n_t}: mu(1) = {res.mu:.10f}")

# Averaging the eigen-equation over the space-time cell gives
#   mu = lambda^2 + r - lambda <(b.k) phi> / <phi>,
# which the computed eigenpair satisfies to discretisation accuracy.
grid = F.CellGrid(2, 32, 256)
prob = EigenProblem(field, 1.0, k, 1.0, grid)
res = principal_eigenvalue(prob)
print(f"\nintegral identity residual on 32^2 x 256: "
      f"{integral_identity_residual(prob, res):.2e}")

# Any positive periodic trial function bounds mu from above; the computed
# eigenfunction is the (nearly) optimal one.
grid = F.CellGrid(2, 16, 512)
prob = EigenProblem(field, 1.0, k, 1.0, grid)
res = principal_eigenvalue(prob)
ones = np.ones((grid.n_t,) + grid.shape)
print(f"\nmu = {res.mu:.8f}")
print(f"sup L(1)/1         = {rayleigh_upper_bound(prob, ones):.8f}")
print(f"sup L(phi)/phi     = {rayleigh_upper_bound(prob, eigenfunction_slices(prob, res)):.8f}")

# Shifting the zeroth-order coefficient moves mu by exactly that amount.
d_res, e_res = shift_identities_check(prob, delta=0.3, eps=0.5)
print(f"\nshift residuals: delta {d_res:.1e}, eps {e_res:.1e}")
