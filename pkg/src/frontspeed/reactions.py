"""Reaction nonlinearities f on [0, 1]."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy import integrate

from .errors import ClassificationError

KINDS = ("kpp", "degenerate", "arrhenius", "ignition", "tabulated")


@dataclass(frozen=True, eq=False)
class ReactionSpec:
    """One member of a nonlinearity family.

    kpp         f(u) = r u (1 - u)
    degenerate  f(u) = u**m (1 - u), m >= 2
    arrhenius   f(u) = exp(-E/u) (1 - u)
    ignition    chi_theta(u) * base(u)
    tabulated   piecewise-linear through (u_knots, f_knots) with a declared f'(0)
    """

    kind: str
    r: float = 1.0
    m: float = 2.0
    E: float = 1.0
    theta: float = 0.5
    base: Optional["ReactionSpec"] = None
    u_knots: Optional[np.ndarray] = field(default=None, repr=False)
    f_knots: Optional[np.ndarray] = field(default=None, repr=False)
    declared_fprime0: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown reaction kind {self.kind!r}")
        if self.kind == "kpp" and not self.r > 0:
            raise ValueError("KPP rate r must be positive")
        if self.kind == "degenerate" and self.m < 2:
            raise ValueError("degenerate exponent m must be >= 2")
        if self.kind == "arrhenius" and not self.E > 0:
            raise ValueError("activation energy E must be positive")
        if self.kind == "ignition":
            if self.base is None:
                raise ValueError("ignition cutoff needs a base nonlinearity")
            if not 0.0 < self.theta < 1.0:
                raise ValueError(f"theta must lie in (0, 1), got {self.theta}")

    @property
    def fprime0(self):
        if self.kind == "kpp":
            return float(self.r)
        if self.kind == "tabulated":
            return float(self.declared_fprime0)
        return 0.0

    @property
    def is_ignition(self):
        return self.kind == "ignition"

    @property
    def is_positive(self):
        if self.kind == "ignition":
            return False
        if self.kind == "tabulated":
            inner = np.linspace(0, 1, 1001)[1:-1]
            return bool(np.all(f_eval(self, inner) > 0))
        return True

    @property
    def is_kpp(self):
        if self.kind == "kpp":
            return True
        if self.kind == "tabulated" and self.fprime0 > 0:
            return self.is_positive and kpp_bound_check(self).ok
        return False

    def __call__(self, u):
        return f_eval(self, u)


def kpp(r=1.0):
    return ReactionSpec("kpp", r=r)


def degenerate(m=2.0):
    return ReactionSpec("degenerate", m=m)


def arrhenius(E=1.0):
    return ReactionSpec("arrhenius", E=E)


def tabulated(u_knots, f_knots, fprime0):
    return ReactionSpec("tabulated", u_knots=np.asarray(u_knots, float),
                        f_knots=np.asarray(f_knots, float), declared_fprime0=fprime0)


def smoothstep(w):
    """Quintic C2 ramp from 0 (w <= 0) to 1 (w >= 1)."""
    w = np.clip(w, 0.0, 1.0)
    return w * w * w * (10.0 + w * (-15.0 + 6.0 * w))


def cutoff(theta, u):
    """chi_theta: 0 for u <= theta/2, 1 for u >= theta, monotone in theta."""
    half = 0.5 * theta
    return smoothstep((np.asarray(u, dtype=float) - half) / half)


def f_eval(spec, u):
    """Evaluate f, clamping u into [0, 1] first."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    kind = spec.kind
    if kind == "kpp":
        out = spec.r * u * (1.0 - u)
    elif kind == "degenerate":
        out = u ** spec.m * (1.0 - u)
    elif kind == "arrhenius":
        with np.errstate(divide="ignore", over="ignore"):
            out = np.where(u > 0, np.exp(-spec.E / np.where(u > 0, u, 1.0)), 0.0) * (1.0 - u)
    elif kind == "ignition":
        out = cutoff(spec.theta, u) * f_eval(spec.base, u)
    else:
        out = np.interp(u, spec.u_knots, spec.f_knots)
    return out if out.ndim else float(out)


def ignition_cutoff(base, theta):
    """Combustion-type approximation chi_theta * base of a positive nonlinearity."""
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    if not base.is_positive:
        raise ClassificationError("ignition cutoff needs a positive base nonlinearity")
    return ReactionSpec("ignition", theta=theta, base=base)


class KppCheck(NamedTuple):
    ok: bool
    violation: float
    u_worst: float


def kpp_bound_check(spec, n_samples=1001):
    """Test f(u) <= u f'(0) at ``n_samples`` uniform points of [0, 1]."""
    if not spec.fprime0 > 0:
        raise ClassificationError(
            f"KPP bound is undefined for {spec.kind} nonlinearities with f'(0) = 0")
    u = np.linspace(0.0, 1.0, n_samples)
    excess = f_eval(spec, u) - u * spec.fprime0
    i = int(np.argmax(excess))
    return KppCheck(bool(excess[i] <= 1e-12), float(max(excess[i], 0.0)), float(u[i]))


def heinze_lower_bound(spec):
    """Front speed lower bound: the integral of sqrt(2 f) over [0, 1]."""
    points = None
    if spec.kind == "ignition":
        points = [spec.theta / 2, spec.theta]
    elif spec.kind == "tabulated":
        points = [p for p in spec.u_knots if 0 < p < 1] or None
    val, _ = integrate.quad(lambda s: np.sqrt(2.0 * max(f_eval(spec, s), 0.0)), 0.0, 1.0,
                            epsabs=1e-10, epsrel=1e-10, points=points, limit=200)
    return float(val)


def lipschitz_bound(spec, n=4001):
    """Sampled estimate of max |f'| on [0, 1], used for explicit step limits."""
    u = np.linspace(0.0, 1.0, n)
    fu = f_eval(spec, u)
    return float(np.max(np.abs(np.diff(fu))) / (u[1] - u[0]))
