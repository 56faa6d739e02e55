"""Direct simulation of u_t = Lap u + b.grad u + f(u) and measured front speeds.

Run:  python demos/05_front_simulation.py   (about a minute)
"""

from frontspeed import fields as F
from frontspeed import reactions as R
from frontspeed.dispersion import minimal_speed
from frontspeed.simulator import (Bump, ChannelGrid, Step, decay_speed_sweep,
                                  estimate_speed, run_front, spreading_interval)

kpp = R.kpp(1.0)
line = ChannelGrid(length=80, n_per_unit=16, dim=1)

# Step data in a homogeneous medium: the front approaches 2 from below,
# with the familiar logarithmic delay.
trace, _ = run_front(F.zero(1), kpp, line, (1.0,), Step(20.0), t_end=60.0)
fit = estimate_speed(trace)
print(f"1-D step: c_obs = {fit.c:.4f} +- {fit.stderr:.4f} (drift {fit.drift:+.4f})")

# Slowly decaying data select faster fronts, c = lambda0 + 1/lambda0, until
# the decay passes lambda* = 1 and the speed saturates at 2.
for lam0, fit in decay_speed_sweep(F.zero(1), kpp, (1.0,), [0.25, 0.5, 1.0, 2.0], line, 40.0):
    pred = lam0 + 1 / lam0 if lam0 < 1 else 2.0
    print(f"lambda0 = {lam0:<4g} c_obs = {fit.c:.4f}   predicted {pred:.4f}")

# Ignition cut-offs slow the front; smaller theta is faster.
for theta in (0.4, 0.2, 0.1):
    trace, _ = run_front(F.zero(1), R.ignition_cutoff(kpp, theta), line, (1.0,),
                         Step(20.0), 60.0)
    print(f"theta = {theta}: c_obs = {estimate_speed(trace).c:.4f}")

# A shear flow along the channel: simulation against the variational speed.
shear = F.shear(1.0)
c_star = minimal_speed(shear, 1.0, (1.0, 0.0), F.CellGrid(2, 16, 128), tol_c=1e-5).c_star
trace, _ = run_front(shear, kpp, ChannelGrid(80, 8, dim=2), (1.0, 0.0), Step(20.0), 30.0)
print(f"\nshear A=1: c_obs = {estimate_speed(trace).c:.4f}, c* = {c_star:.4f}")

# A bump spreads both ways; each edge moves at the speed for its direction.
trace, _ = run_front(shear, kpp, ChannelGrid(160, 8, dim=2), (1.0, 0.0),
                     Bump(75.0, 85.0, 0.5), 30.0)
print("bump edges (left, right):", tuple(round(c, 4) for c in spreading_interval(trace)))
