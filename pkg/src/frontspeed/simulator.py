"""Direct simulation of u_t = lap u + b(x, t).grad u + f(u) in a channel.

The channel runs along the unit direction k (coordinate s = k.x) with
homogeneous Neumann ends; in 2-D the transverse coordinate y is periodic with
period 1.  Space is discretized with second-order central differences and
time with the two-stage SSP Runge-Kutta method.  For cell Peclet numbers
below 2 and the step limit used here, each forward-Euler stage is a monotone
map that fixes the constants 0 and 1, so the scheme obeys the discrete
maximum principle.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np
from scipy import stats

from . import fields
from .errors import (FrontAbsentError, GeometryError, InsufficientDataError,
                     StabilityError)
from .fields import FieldSpec
from .reactions import ReactionSpec, f_eval, lipschitz_bound

log = logging.getLogger(__name__)

BOUND_SLACK = 1e-6
CLAMP = 1e-12


@dataclass(frozen=True)
class ChannelGrid:
    length: int = 80
    n_per_unit: int = 16
    dim: int = 1
    dt: Optional[float] = None
    buffer: float = 10.0
    moving_window: bool = True

    def __post_init__(self):
        if int(self.length) != self.length or self.length < 1:
            raise ValueError("channel length must be a positive whole number of periods")
        if self.n_per_unit < 4:
            raise ValueError("need at least 4 points per unit length")
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")

    @property
    def h(self):
        return 1.0 / self.n_per_unit

    @property
    def n_s(self):
        return int(self.length) * self.n_per_unit + 1

    @property
    def shape(self):
        return (self.n_s,) if self.dim == 1 else (self.n_s, self.n_per_unit)

    def s(self):
        return np.arange(self.n_s) * self.h

    def y(self):
        return np.arange(self.n_per_unit) * self.h


@dataclass(frozen=True)
class Step:
    x0: float


@dataclass(frozen=True)
class ExpDecay:
    lam0: float
    x0: float


@dataclass(frozen=True)
class Bump:
    a1: float
    a2: float
    m: float
    height: Optional[float] = None


InitialData = Union[Step, ExpDecay, Bump]


def make_initial(kind, channel):
    """Initial state on the channel grid; depends on s = k.x only."""
    s = channel.s()
    L, h = channel.length, channel.h
    if isinstance(kind, Step):
        if not 0 < kind.x0 < L:
            raise GeometryError(f"step position {kind.x0} outside channel (0, {L})")
        prof = np.clip((kind.x0 + h - s) / (2 * h), 0.0, 1.0)
    elif isinstance(kind, ExpDecay):
        if not 0 < kind.x0 < L:
            raise GeometryError(f"decay onset {kind.x0} outside channel (0, {L})")
        if not kind.lam0 > 0:
            raise ValueError("decay rate must be positive")
        prof = np.minimum(1.0, np.exp(-kind.lam0 * (s - kind.x0)))
    elif isinstance(kind, Bump):
        if not 0 < kind.m < 1:
            raise ValueError("bump threshold m must lie in (0, 1)")
        height = 0.5 * (1 + kind.m) if kind.height is None else kind.height
        if not kind.m < height <= 1:
            raise ValueError("bump height must exceed m and not exceed 1")
        if not (1 <= kind.a1 < kind.a2 <= L - 1):
            raise GeometryError(f"bump [{kind.a1}, {kind.a2}] plus ramps does not fit "
                                f"in the channel (0, {L})")
        from .reactions import smoothstep
        prof = height * smoothstep(s - (kind.a1 - 1)) * smoothstep((kind.a2 + 1) - s)
    else:
        raise TypeError(f"unknown initial data {kind!r}")
    if channel.dim == 1:
        return prof
    return np.repeat(prof[:, None], channel.n_per_unit, axis=1)


def _transverse_mean(state):
    return state if state.ndim == 1 else state.mean(axis=1)


def front_position(state, channel, level=0.5):
    """Largest s where the transverse mean is >= level, linearly interpolated."""
    ubar = _transverse_mean(np.asarray(state))
    above = np.nonzero(ubar >= level)[0]
    if above.size == 0:
        raise FrontAbsentError(f"no crossing of level {level}")
    i = above[-1]
    if i == len(ubar) - 1:
        return float(i * channel.h)
    return float((i + (ubar[i] - level) / (ubar[i] - ubar[i + 1])) * channel.h)


def left_edge_position(state, channel, level=0.5):
    """Smallest s where the transverse mean is >= level, linearly interpolated."""
    ubar = _transverse_mean(np.asarray(state))
    above = np.nonzero(ubar >= level)[0]
    if above.size == 0:
        raise FrontAbsentError(f"no crossing of level {level}")
    i = above[0]
    if i == 0:
        return 0.0
    return float((i - (ubar[i] - level) / (ubar[i] - ubar[i - 1])) * channel.h)


@dataclass
class FrontTrace:
    times: np.ndarray
    right: np.ndarray
    left: Optional[np.ndarray]
    u_min: np.ndarray
    u_max: np.ndarray
    dt: float = 0.0

    def to_csv(self, fh, comment=None):
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        cols = ["t", "x_front_right"] + (["x_front_left"] if self.left is not None else [])
        writer.writerow(cols + ["u_min", "u_max"])
        for j, t in enumerate(self.times):
            row = [t, self.right[j]] + ([self.left[j]] if self.left is not None else [])
            writer.writerow([f"{v:#.10g}" for v in row + [self.u_min[j], self.u_max[j]]])


class SpeedFit(NamedTuple):
    c: float
    stderr: float
    drift: float
    window: Tuple[float, float]


def _channel_frame(k, dim):
    k = np.asarray(k, dtype=float)
    if k.shape != (dim,) or abs(np.linalg.norm(k) - 1) > 1e-12:
        raise ValueError(f"direction {tuple(k)} is not a unit vector in R^{dim}")
    if dim == 2 and np.count_nonzero(np.abs(k) > 1e-12) != 1:
        raise GeometryError("channel direction must be a coordinate axis so the "
                            "transverse direction stays periodic")
    if dim == 1:
        return k, None
    return k, np.array([-k[1], k[0]])


class _Stepper:
    """Right-hand side of the semi-discrete channel problem."""

    def __init__(self, field: FieldSpec, reaction: ReactionSpec, channel: ChannelGrid, k):
        self.field, self.reaction, self.channel = field, reaction, channel
        self.k, self.kperp = _channel_frame(k, channel.dim)
        self.h = channel.h
        self.active = field.kind != "zero"
        if self.active:
            S, Y = np.meshgrid(channel.s(), channel.y(), indexing="ij")
            self._x = [S * self.k[d] + Y * self.kperp[d] for d in range(2)]
            if field.separable:
                b = fields.spatial_velocity(field, *self._x)
                self._bs0 = self.k[0] * b[0] + self.k[1] * b[1]
                self._by0 = self.kperp[0] * b[0] + self.kperp[1] * b[1]

    def velocity(self, t):
        if self.field.separable:
            g = self.field.modulation(t)
            return g * self._bs0, g * self._by0
        b = fields.velocity(self.field, *self._x, t=t)
        return (self.k[0] * b[0] + self.k[1] * b[1],
                self.kperp[0] * b[0] + self.kperp[1] * b[1])

    def rhs(self, u, t):
        h2 = self.h * self.h
        out = np.empty_like(u)
        # Neumann ends through reflected ghost nodes
        out[1:-1] = u[2:] - 2.0 * u[1:-1] + u[:-2]
        out[0] = 2.0 * (u[1] - u[0])
        out[-1] = 2.0 * (u[-2] - u[-1])
        if u.ndim == 2:
            up, dn = np.roll(u, -1, axis=1), np.roll(u, 1, axis=1)
            out += up - 2.0 * u + dn
        out /= h2
        if self.active:
            bs, by = self.velocity(t)
            us = np.zeros_like(u)
            us[1:-1] = (u[2:] - u[:-2]) / (2.0 * self.h)
            out += bs * us + by * (up - dn) / (2.0 * self.h)
        out += f_eval(self.reaction, u)
        return out


def stable_dt(field, reaction, channel, c_est=None):
    """Largest step for which every forward-Euler stage is monotone."""
    h = channel.h
    bmax = field.sup_norm()
    if bmax * h >= 2.0:
        raise StabilityError(f"cell Peclet number {bmax * h:.3g} >= 2; use more than "
                             f"{int(math.ceil(bmax / 2))} points per unit length")
    lip = lipschitz_bound(reaction)
    if c_est is None:
        c_est = 2.0 * math.sqrt(max(lip, 1e-12)) + bmax
    limits = [1.0 / (2 * channel.dim / h ** 2 + lip), h / (bmax + c_est)]
    if reaction.fprime0 > 0:
        limits.append(0.5 / reaction.fprime0)
    return 0.9 * min(limits)


def _shift_window(u, channel, units, tail_decay=None, clean_back=5):
    """Drop ``units`` periods at the trailing end and extend the leading end.

    New cells repeat the last period lying ``clean_back`` periods inside the
    Neumann end, scaled by exp(-tail_decay) per period; far ahead of the
    front the solution keeps the decay rate of the initial data, so this is
    exact for the linear leading edge exp(-lam0 s) * periodic.  With no
    ``tail_decay`` (step-like data) the new cells are zero.
    """
    n = channel.n_per_unit
    kept = u[units * n: u.shape[0] - clean_back * n]
    reps = units + clean_back
    if tail_decay is None:
        ext = np.zeros((reps * n + 1,) + u.shape[1:])
    else:
        last = kept[-n - 1:-1]
        ratio = math.exp(-tail_decay)
        ext = np.concatenate([last * ratio ** j for j in range(1, reps + 1)]
                             + [last[:1] * ratio ** (reps + 1)], axis=0)
    # kept ends on a period-boundary node, which the extension regenerates
    return np.concatenate([kept[:-1], ext], axis=0)


def evolve(u0, field, reaction, channel, k, t_end, sample_every=0.25,
           track_left=False, c_est=None, tail_decay=None):
    """Integrate to ``t_end`` and record front positions every ``sample_every``.

    Returns ``(trace, final_state)``.  Positions are absolute channel
    coordinates (moving-window shifts are added back in).  In moving-window
    mode the domain is shifted by whole periods once the front passes the
    channel midpoint; ``tail_decay`` is the decay rate of the initial data
    ahead of the front (None for step-like data).
    """
    u = np.array(u0, dtype=float)
    if u.shape != channel.shape:
        raise ValueError(f"initial state has shape {u.shape}, channel is {channel.shape}")
    if np.min(u) < 0 or np.max(u) > 1:
        raise ValueError("initial state must take values in [0, 1]")
    stepper = _Stepper(field, reaction, channel, k)
    dt_max = channel.dt or stable_dt(field, reaction, channel, c_est)
    per_sample = max(1, int(math.ceil(sample_every / dt_max - 1e-9)))
    dt = sample_every / per_sample
    n_samples = int(round(t_end / sample_every))
    moving = channel.moving_window and not track_left
    L, buf = channel.length, channel.buffer

    times, right, left, lo, hi = [], [], [], [], []
    offset = 0.0
    t = 0.0
    run_min, run_max = float(np.min(u)), float(np.max(u))

    def record(j):
        nonlocal u, offset
        xr = front_position(u, channel)
        if moving and xr > L / 2:
            units = int(math.floor(xr - L / 4))
            u = _shift_window(u, channel, units, tail_decay)
            offset += units
            xr -= units
        if xr > L - buf:
            raise GeometryError(f"front at s={xr + offset:.3f} entered the end buffer at "
                                f"sample {j} (t={t:.3f}); lengthen the channel")
        times.append(t)
        right.append(xr + offset)
        if track_left:
            xl = left_edge_position(u, channel)
            if xl < buf:
                raise GeometryError(f"left edge at s={xl:.3f} entered the end buffer at "
                                    f"sample {j} (t={t:.3f}); lengthen the channel")
            left.append(xl + offset)
        lo.append(run_min)
        hi.append(run_max)

    record(0)
    for j in range(1, n_samples + 1):
        run_min, run_max = np.inf, -np.inf
        for _ in range(per_sample):
            u1 = u + dt * stepper.rhs(u, t)
            u = 0.5 * u + 0.5 * (u1 + dt * stepper.rhs(u1, t + dt))
            t += dt
            umin, umax = float(np.min(u)), float(np.max(u))
            if umin < -BOUND_SLACK or umax > 1 + BOUND_SLACK:
                raise StabilityError(
                    f"maximum principle violated at t={t:.4f} (u in [{umin:.3e}, "
                    f"{umax:.6f}]); retry with dt <= {dt / 2:.3e}")
            run_min, run_max = min(run_min, umin), max(run_max, umax)
            np.clip(u, -CLAMP, 1 + CLAMP, out=u)
        t = j * sample_every
        record(j)
    trace = FrontTrace(np.array(times), np.array(right),
                       np.array(left) if track_left else None,
                       np.array(lo), np.array(hi), dt)
    return trace, u


def default_window(times):
    """Last half of the run, rounded to a whole number of time periods."""
    span = times[-1] - times[0]
    half = max(1.0, math.floor(span / 2)) if span >= 2 else span / 2
    return times[-1] - half, times[-1]


def estimate_speed(trace, window=None, edge="right"):
    """Least-squares front speed over ``window`` (default: last half of the run).

    ``drift`` is the slope difference between the second and first halves of
    the window, a finite-time convergence diagnostic.
    """
    t = np.asarray(trace.times)
    x = np.asarray(trace.right if edge == "right" else trace.left)
    if x is None:
        raise ValueError(f"trace has no {edge} edge")
    t_min, t_max = window if window is not None else default_window(t)
    sel = (t >= t_min - 1e-12) & (t <= t_max + 1e-12)
    if np.count_nonzero(sel) < 10:
        raise InsufficientDataError(
            f"only {np.count_nonzero(sel)} samples in window [{t_min}, {t_max}]; need 10")
    ts, xs = t[sel], x[sel]
    sign = 1.0 if edge == "right" else -1.0
    fit = stats.linregress(ts, xs)
    stderr = 0.0 if not np.isfinite(fit.stderr) else float(fit.stderr)
    mid = len(ts) // 2
    drift = math.nan
    if mid >= 3 and len(ts) - mid >= 3:
        first = stats.linregress(ts[:mid], xs[:mid]).slope
        second = stats.linregress(ts[mid:], xs[mid:]).slope
        drift = sign * float(second - first)
    return SpeedFit(sign * float(fit.slope), stderr, drift, (float(t_min), float(t_max)))


def spreading_interval(trace, window=None):
    """(leftward edge speed, rightward edge speed) of a bump run."""
    if trace.left is None:
        raise ValueError("trace was recorded without the left edge")
    return estimate_speed(trace, window, "left").c, estimate_speed(trace, window, "right").c


def run_front(field, reaction, channel, k, initial, t_end, sample_every=0.25):
    """make_initial + evolve; bump data automatically tracks both edges."""
    u0 = make_initial(initial, channel)
    tail = initial.lam0 if isinstance(initial, ExpDecay) else None
    return evolve(u0, field, reaction, channel, k, t_end, sample_every,
                  track_left=isinstance(initial, Bump), tail_decay=tail)


def decay_speed_sweep(field, reaction, k, lam0_list, channel, t_end, x0=20.0,
                      sample_every=0.25, threads=1):
    """Front speed for exponentially decaying data exp(-lam0 (k.x - x0)) per lam0."""
    lam0_list = [float(v) for v in lam0_list]
    if any(v <= 0 for v in lam0_list):
        raise ValueError("decay rates must be positive")

    def one(lam0):
        trace, _ = run_front(field, reaction, channel, k, ExpDecay(lam0, x0), t_end,
                             sample_every)
        return lam0, estimate_speed(trace)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, lam0_list))
    return [one(v) for v in lam0_list]
