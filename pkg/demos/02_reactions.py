"""Reaction families: KPP, positive, and ignition nonlinearities.

Run:  python demos/02_reactions.py
"""

import numpy as np

from frontspeed import reactions as R

u = np.linspace(0, 1, 6)
kpp = R.kpp(1.0)
for spec in (kpp, R.degenerate(2), R.arrhenius(1.0)):
    vals = " ".join(f"{v:.4f}" for v in R.f_eval(spec, u))
    print(f"{spec.kind:10s} f'(0)={spec.fprime0:g}  f(u) = {vals}")

# The KPP bound f(u) <= u f'(0) holds for u(1-u) but fails for a bumped profile.
print("\nkpp(1) bound check:", R.kpp_bound_check(kpp))
bumped = R.tabulated([0.0, 0.5, 1.0], [0.0, 0.7, 0.0], fprime0=1.0)
print("bumped profile check:", R.kpp_bound_check(bumped))

# Ignition cut-offs switch the reaction off below theta.  Lowering theta
# only ever adds reaction, and the cut-off converges to the base reaction.
print("\ntheta    f(0.3)    sup|f_theta - f|")
grid = np.linspace(0, 1, 1001)
for theta in (0.4, 0.2, 0.1, 0.05):
    ign = R.ignition_cutoff(kpp, theta)
    gap = np.max(np.abs(R.f_eval(ign, grid) - R.f_eval(kpp, grid)))
    print(f"{theta:5.2f}   {R.f_eval(ign, 0.3):.4f}    {gap:.4f}")

# The flow-independent lower bound on front speeds, int_0^1 sqrt(2 f).
print(f"\nHeinze bound for u(1-u): {R.heinze_lower_bound(kpp):.9f} "
      f"(pi sqrt(2)/8 = {np.pi * np.sqrt(2) / 8:.9f})")
