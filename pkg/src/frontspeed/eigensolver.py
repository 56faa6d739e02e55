"""Principal eigenvalue mu(lambda) of the periodic-parabolic operator

    L_lambda phi = lap phi + (b - 2 lambda k).grad phi
                   + (lambda^2 - lambda b.k + r) phi - phi_t

on space-time periodic functions.  The eigenvalue is read off the one-period
solution map of w_t = L_lambda w + w_t (the monodromy map), whose dominant
eigenvalue is exp(mu).  The map is positive and compact, so power iteration
from any positive start converges to the principal pair.

Spatial derivatives are Fourier pseudo-spectral.  All constant-coefficient
terms (diffusion, the -2 lambda k drift and the constant part of the
zeroth-order coefficient) are integrated exactly through an integrating
factor; the flow terms b.grad w - lambda (b.k) w are advanced with classical
RK4 in the integrating-factor frame.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import fields
from .errors import ConvergenceError, StepSizeError
from .fields import CellGrid, FieldSpec

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 500


@dataclass(frozen=True, eq=False)
class EigenProblem:
    field: FieldSpec
    r: float
    k: Sequence[float]
    lam: float
    grid: CellGrid
    eps: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        if k.shape != (self.grid.dim,):
            raise ValueError(f"direction k must have {self.grid.dim} components")
        if abs(np.linalg.norm(k) - 1.0) > 1e-12:
            raise ValueError(f"direction k = {tuple(k)} is not a unit vector")
        if self.field.dim != self.grid.dim:
            raise ValueError("field and grid dimensions differ")
        for name in ("lam", "eps", "delta"):
            val = getattr(self, name)
            if not np.isfinite(val) or val < 0:
                raise ValueError(f"{name} must be finite and nonnegative, got {val}")
        object.__setattr__(self, "k", tuple(float(c) for c in k))

    @property
    def constant_rate(self):
        """Constant part of the zeroth-order coefficient."""
        return (1.0 + self.eps) * self.lam ** 2 + self.r - self.delta

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass
class EigenResult:
    mu: float
    phi: np.ndarray
    iterations: int
    residual: float
    converged: bool


def _first_derivative_wavenumbers(n, real_axis=False):
    if real_axis:
        k = 2 * np.pi * np.fft.rfftfreq(n, d=1.0 / n)
        k[-1] = 0.0
    else:
        k = 2 * np.pi * np.fft.fftfreq(n, d=1.0 / n)
        k[n // 2] = 0.0
    return k


def _second_derivative_symbol(n, real_axis=False):
    f = np.fft.rfftfreq if real_axis else np.fft.fftfreq
    return -(2 * np.pi * f(n, d=1.0 / n)) ** 2


class Propagator:
    """One-period solution operator for a fixed :class:`EigenProblem`."""

    def __init__(self, problem: EigenProblem):
        self.problem = problem
        grid = problem.grid
        n = grid.n_x
        self.dt = grid.dt
        self.dim = grid.dim
        if grid.dim == 1:
            kd = [_first_derivative_wavenumbers(n, real_axis=True)]
            lap = _second_derivative_symbol(n, real_axis=True)
            self._fft, self._ifft = np.fft.rfft, (lambda a: np.fft.irfft(a, n))
        else:
            kd = [_first_derivative_wavenumbers(n)[:, None],
                  _first_derivative_wavenumbers(n, real_axis=True)[None, :]]
            lap = (_second_derivative_symbol(n)[:, None]
                   + _second_derivative_symbol(n, real_axis=True)[None, :])
            self._fft, self._ifft = np.fft.rfft2, (lambda a: np.fft.irfft2(a, (n, n)))
        self._ik = [1j * kk for kk in kd]
        lam, k = problem.lam, problem.k
        drift = sum(kc * kk for kc, kk in zip(k, kd))
        symbol = lap - 2j * lam * drift + problem.constant_rate
        self.E = np.exp(symbol * self.dt)
        self.E2 = np.exp(symbol * self.dt / 2)
        self.active = problem.field.kind != "zero"
        self._nodes = grid.nodes()
        if problem.field.separable:
            self._b0 = fields.spatial_velocity(problem.field, *self._nodes)
            self._bk0 = sum(kc * bc for kc, bc in zip(k, self._b0))

    def coefficients(self, t):
        """(b components, b.k) on the grid at time t."""
        spec = self.problem.field
        if spec.separable:
            g = spec.modulation(t)
            return [g * c for c in self._b0], g * self._bk0
        b = fields.velocity(spec, *self._nodes, t=t)
        return list(b), sum(kc * bc for kc, bc in zip(self.problem.k, b))

    def flow_terms(self, v_hat, t):
        """Fourier transform of b.grad w - lambda (b.k) w."""
        b, bk = self.coefficients(t)
        w = self._ifft(v_hat)
        out = -self.problem.lam * bk * w
        for bc, ik in zip(b, self._ik):
            out += bc * self._ifft(ik * v_hat)
        return self._fft(out)

    def step(self, v_hat, t):
        E, E2, dt = self.E, self.E2, self.dt
        if not self.active:
            return E * v_hat
        k1 = self.flow_terms(v_hat, t)
        k2 = self.flow_terms(E2 * (v_hat + 0.5 * dt * k1), t + 0.5 * dt)
        k3 = self.flow_terms(E2 * v_hat + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = self.flow_terms(E * v_hat + dt * (E2 * k3), t + dt)
        return E * v_hat + (dt / 6.0) * (E * k1 + 2.0 * E2 * (k2 + k3) + k4)

    def period(self, v0, store=False):
        """Advance from t = 0 to t = 1; optionally also return all n_t slices."""
        v_hat = self._fft(np.asarray(v0, dtype=float))
        n_t = self.problem.grid.n_t
        slices = [] if store else None
        for j in range(n_t):
            if store:
                slices.append(self._ifft(v_hat))
            v_hat = self.step(v_hat, j * self.dt)
        w = self._ifft(v_hat)
        if store:
            return w, np.stack(slices)
        return w


def propagate_period(problem, v0):
    """w(., 1) for w_t = L_lambda w + w_t started from the positive array ``v0``."""
    v0 = np.asarray(v0, dtype=float)
    if v0.shape != problem.grid.shape:
        raise ValueError(f"v0 has shape {v0.shape}, grid shape is {problem.grid.shape}")
    if np.min(v0) <= 0:
        raise ValueError("v0 must be strictly positive")
    w = Propagator(problem).period(v0)
    _check_positive(w, problem)
    return w


def _check_positive(w, problem):
    if np.min(w) <= 0:
        raise StepSizeError(
            f"propagated solution lost positivity (min {np.min(w):.3e}) with "
            f"n_t={problem.grid.n_t}; increase n_t")


def principal_eigenvalue(problem, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                         v0=None, seed=None, raise_on_failure=True):
    """Power iteration on the monodromy map.

    The start vector is ``v0`` if given, a seeded random positive array if
    ``seed`` is given, otherwise the constant 1.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    grid = problem.grid
    if v0 is None:
        if seed is None:
            v = np.ones(grid.shape)
        else:
            v = 0.5 + np.random.default_rng(seed).random(grid.shape)
    else:
        v = np.array(v0, dtype=float)
    if np.min(v) <= 0:
        raise ValueError("start vector must be strictly positive")
    v /= np.max(v)
    prop = Propagator(problem)
    mu_prev = np.nan
    mu = np.nan
    for it in range(1, max_iter + 1):
        w = prop.period(v)
        _check_positive(w, problem)
        s = float(np.max(w))
        mu_prev, mu = mu, float(np.log(s))
        v = w / s
        if it > 1 and abs(mu - mu_prev) <= tol:
            return EigenResult(mu, v, it, abs(mu - mu_prev), True)
    result = EigenResult(mu, v, max_iter, abs(mu - mu_prev), False)
    if raise_on_failure:
        raise ConvergenceError(
            f"power iteration not converged after {max_iter} periods at "
            f"lambda={problem.lam}: last iterates {mu_prev!r}, {mu!r}",
            mu_prev, mu, result)
    log.warning("power iteration unconverged at lambda=%g (residual %.3e)",
                problem.lam, result.residual)
    return result


def eigenfunction_slices(problem, result):
    """phi(., t_j) for all n_t time slices, with exp(mu t) growth removed."""
    _, slices = Propagator(problem).period(result.phi, store=True)
    decay = np.exp(-result.mu * problem.grid.times())
    return slices * decay.reshape((-1,) + (1,) * problem.grid.dim)


def integral_identity_residual(problem, result):
    """|mu - lambda^2 - r + lambda <(b.k) phi> / <phi>| over the space-time cell.

    Averaging the eigen-equation over the cell kills the diffusion and both
    drift terms (periodicity, div b = 0), which leaves this balance.
    """
    if not result.converged:
        raise ValueError("identity check needs a converged eigenpair")
    if problem.eps or problem.delta:
        raise ValueError("identity check is stated for eps = delta = 0")
    phi = eigenfunction_slices(problem, result)
    if problem.field.kind == "zero":
        weighted = 0.0
    else:
        prop = Propagator(problem)
        bk = np.stack([prop.coefficients(t)[1] for t in problem.grid.times()])
        weighted = float(np.mean(bk * phi) / np.mean(phi))
    lam = problem.lam
    return abs(result.mu - lam ** 2 - problem.r + lam * weighted)


def _spectral_derivatives(psi, dim):
    """d/dt, grad and laplacian of a space-time array psi[t, x...] (all periodic)."""
    n_t, n = psi.shape[0], psi.shape[1]
    kt = _first_derivative_wavenumbers(n_t)
    kx = _first_derivative_wavenumbers(n)
    k2 = _second_derivative_symbol(n)
    spatial_axes = tuple(range(1, dim + 1))
    hat = np.fft.fftn(psi)
    shape_t = (n_t,) + (1,) * dim
    dpsi_dt = np.fft.ifftn(1j * kt.reshape(shape_t) * hat).real
    grads, lap_hat = [], np.zeros_like(hat)
    for ax in spatial_axes:
        shape = [1] * (dim + 1)
        shape[ax] = n
        grads.append(np.fft.ifftn(1j * kx.reshape(shape) * hat).real)
        lap_hat = lap_hat + k2.reshape(shape) * hat
    return dpsi_dt, grads, np.fft.ifftn(lap_hat).real


def apply_operator(problem, psi):
    """L_lambda psi for a space-time periodic array psi[t, x...] on the cell grid."""
    grid = problem.grid
    psi = np.asarray(psi, dtype=float)
    if psi.shape != (grid.n_t,) + grid.shape:
        raise ValueError(f"trial array has shape {psi.shape}, expected "
                         f"{(grid.n_t,) + grid.shape}")
    dpsi_dt, grads, lap = _spectral_derivatives(psi, grid.dim)
    prop = Propagator(problem)
    lam, k = problem.lam, problem.k
    out = lap - dpsi_dt + problem.constant_rate * psi
    for j, t in enumerate(grid.times()):
        b, bk = prop.coefficients(t)
        for d in range(grid.dim):
            out[j] += (b[d] - 2 * lam * k[d]) * grads[d][j]
        out[j] -= lam * bk * psi[j]
    return out


def rayleigh_upper_bound(problem, psi):
    """max over the space-time grid of (L_lambda psi)/psi; bounds mu from above."""
    psi = np.asarray(psi, dtype=float)
    if np.min(psi) <= 0:
        raise ValueError("trial function must be strictly positive")
    return float(np.max(apply_operator(problem, psi) / psi))


def shift_identities_check(problem, delta, eps, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """(|mu_delta - (mu - delta)|, |mu^eps - (mu + eps lambda^2)|)."""
    if delta < 0 or eps < 0:
        raise ValueError("delta and eps must be nonnegative")
    base = problem.with_(eps=0.0, delta=0.0)
    mu = principal_eigenvalue(base, tol, max_iter).mu
    mu_delta = principal_eigenvalue(base.with_(delta=delta), tol, max_iter).mu
    mu_eps = principal_eigenvalue(base.with_(eps=eps), tol, max_iter).mu
    return abs(mu_delta - (mu - delta)), abs(mu_eps - (mu + eps * problem.lam ** 2))


def dump_eigenfunction_csv(path, problem, result):
    """Write phi(x, t=0) as rows (x1, x2, phi) (or (x1, phi) in 1-D)."""
    nodes = [a.ravel() for a in problem.grid.nodes()]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i + 1}" for i in range(len(nodes))] + ["phi"])
        for row in zip(*nodes, result.phi.ravel()):
            writer.writerow([f"{v:.10g}" for v in row])
