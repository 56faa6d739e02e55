"""Dispersion curve lambda -> mu(lambda) and the speeds derived from it."""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from .eigensolver import (DEFAULT_MAX_ITER, DEFAULT_TOL, EigenProblem,
                          principal_eigenvalue)
from .errors import ConvergenceError, OrderingError, StructureError
from .fields import CellGrid, FieldSpec

log = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5) - 1) / 2


@dataclass
class DispersionCurve:
    k: Tuple[float, ...]
    lams: np.ndarray
    mus: np.ndarray
    converged: np.ndarray
    grid: Optional[CellGrid] = None
    tol: Optional[float] = None

    def __post_init__(self):
        self.lams = np.asarray(self.lams, dtype=float)
        self.mus = np.asarray(self.mus, dtype=float)
        self.converged = np.asarray(self.converged, dtype=bool)
        if np.any(np.diff(self.lams) <= 0):
            raise ValueError("lambda samples must be strictly increasing")

    def __len__(self):
        return len(self.lams)

    def to_csv(self, fh, comment=None):
        writer = csv.writer(fh, lineterminator="\n")
        if comment:
            fh.write(f"# {comment}\n")
        writer.writerow(["lambda", "mu", "mu_over_lambda", "converged"])
        for lam, mu, ok in zip(self.lams, self.mus, self.converged):
            ratio = mu / lam if lam > 0 else math.inf
            writer.writerow([f"{lam:#.10g}", f"{mu:#.10g}", f"{ratio:#.10g}",
                             "true" if ok else "false"])

    def csv_text(self, comment=None):
        buf = io.StringIO()
        self.to_csv(buf, comment)
        return buf.getvalue()


@dataclass
class SpeedResult:
    c_star: float
    lambda_star: float
    bracket: Tuple[float, float]
    iterations: int
    eps: float = 0.0
    probes: List[Tuple[float, float]] = field(default_factory=list, repr=False)

    def report(self):
        key = "c_star" if self.eps == 0 else "c_star_eps"
        lines = [f"{key}={self.c_star:.6f} lambda_star={self.lambda_star:.6f}"]
        if self.eps:
            lines[0] += f" eps={self.eps:g}"
        return "\n".join(lines)


class Dispersion:
    """mu(lambda) for one (field, r, k, grid) with memoized eigen-solves."""

    def __init__(self, field: FieldSpec, r: float, k: Sequence[float], grid: CellGrid,
                 tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER, delta: float = 0.0,
                 seed: Optional[int] = None):
        self.field, self.r, self.grid = field, float(r), grid
        self.k = tuple(float(c) for c in k)
        self.tol, self.max_iter, self.delta = tol, max_iter, delta
        self.seed = seed
        self._cache = {}
        # validates k, dimensions
        self.problem(0.0)

    def problem(self, lam, eps=0.0):
        return EigenProblem(self.field, self.r, self.k, lam, self.grid, eps=eps,
                            delta=self.delta)

    def solve(self, lam):
        lam = float(lam)
        if lam not in self._cache:
            self._cache[lam] = principal_eigenvalue(self.problem(lam), self.tol, self.max_iter,
                                                    seed=self.seed, raise_on_failure=False)
        return self._cache[lam]

    def mu(self, lam):
        res = self.solve(lam)
        if not res.converged:
            raise ConvergenceError(f"mu({lam}) did not converge", np.nan, res.mu, res)
        return res.mu

    def __call__(self, lam):
        return self.mu(lam)


def sample_curve(field, r, k, lams, grid, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                 threads=1, delta=0.0, seed=None):
    """One eigen-solve per lambda; unconverged points are flagged, not dropped."""
    lams = np.asarray(lams, dtype=float)
    if np.any(lams < 0):
        raise ValueError("lambda samples must be nonnegative")
    disp = Dispersion(field, r, k, grid, tol, max_iter, delta, seed)

    def run(lam):
        return principal_eigenvalue(disp.problem(lam), tol, max_iter, seed=seed,
                                    raise_on_failure=False)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, lams))
    else:
        results = [run(lam) for lam in lams]
    return DispersionCurve(disp.k, lams, [res.mu for res in results],
                           [res.converged for res in results], grid, tol)


@dataclass
class ConvexityReport:
    worst: float
    lam_at: Optional[float]
    passed: bool
    checked: int


def convexity_check(curve, tol_cvx=1e-6):
    """Midpoint convexity over consecutive equally spaced triples."""
    if len(curve) < 3:
        raise ValueError("convexity check needs at least 3 samples")
    lams, mus = curve.lams, curve.mus
    worst, where, checked = -math.inf, None, 0
    for i in range(len(lams) - 2):
        mid = 0.5 * (lams[i] + lams[i + 2])
        if not math.isclose(lams[i + 1], mid, rel_tol=1e-9, abs_tol=1e-12):
            continue
        checked += 1
        gap = mus[i + 1] - 0.5 * (mus[i] + mus[i + 2])
        if gap > worst:
            worst, where = float(gap), float(lams[i + 1])
    if checked == 0:
        raise ValueError("no equally spaced triples to check")
    return ConvexityReport(worst, where, worst <= tol_cvx, checked)


def golden_section(f, a, b, tol, rtol=0.0):
    """Minimize a unimodal f on [a, b] until b - a <= tol + rtol * (a + b) / 2.

    Returns (x_min, f(x_min), (a, b), evaluations).
    """
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    evals = 2
    while b - a > tol + rtol * 0.5 * (a + b):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        evals += 1
    if fc < fd:
        return c, fc, (a, b), evals
    return d, fd, (a, b), evals


def _bracket(g, scale):
    """Interval [lo, hi] on which g = mu/lambda (+ eps lambda) descends then ascends."""
    lo, hi = 0.1 * scale, 10.0 * scale
    floor = 0.05 * scale
    while not g(lo) > g(lo * 1.05):
        if lo <= floor:
            log.warning("mu/lambda not descending at the left bracket edge %g", lo)
            break
        lo = max(lo / 2, floor)
    while not g(hi) > g(hi / 1.05):
        hi *= 2
        if hi > 1e3 * scale:
            raise StructureError(
                f"no ascent of mu/lambda found up to lambda={hi:g}; dispersion curve "
                "is not behaving convexly")
    return lo, hi


def _minimize(disp, eps, tol_c):
    if not disp.r > 0:
        raise ValueError("minimal speed needs a positive linear growth rate r = f'(0)")
    probes = []

    def g(lam):
        val = disp.mu(lam) / lam + eps * lam
        probes.append((lam, val))
        return val

    scale = math.sqrt(disp.r)
    lo, hi = _bracket(g, scale)
    lam, val, bracket, evals = golden_section(g, lo, hi, 0.0, rtol=tol_c)
    return SpeedResult(val, lam, bracket, evals, eps, probes)


def _auto_tol(tol_c, r):
    # eigen tolerance <= 0.01 * speed tolerance * lambda*, with lambda* ~ sqrt(r)
    return min(DEFAULT_TOL, 0.01 * tol_c * 0.1 * math.sqrt(r))


def minimal_speed(field, r, k, grid, tol_c=1e-6, tol=None, max_iter=DEFAULT_MAX_ITER,
                  delta=0.0, dispersion=None):
    """c* = inf over lambda > 0 of mu(lambda)/lambda by golden-section search."""
    disp = dispersion or Dispersion(field, r, k, grid, tol or _auto_tol(tol_c, r),
                                    max_iter, delta)
    return _minimize(disp, 0.0, tol_c)


def regularized_minimal_speed(field, r, k, grid, eps, tol_c=1e-6, tol=None,
                              max_iter=DEFAULT_MAX_ITER, dispersion=None):
    """inf over lambda > 0 of mu(lambda)/lambda + eps lambda."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    disp = dispersion or Dispersion(field, r, k, grid, tol or _auto_tol(tol_c, r), max_iter)
    return _minimize(disp, float(eps), tol_c)


def lambda_for_speed(dispersion, speed, c, xtol=1e-8, tangency=None):
    """Root lambda_c in (0, lambda*] of mu(lambda) = c lambda for c >= c*."""
    tangency = 10 * 1e-6 if tangency is None else tangency
    if abs(c - speed.c_star) <= tangency:
        return speed.lambda_star
    if c < speed.c_star:
        raise OrderingError(f"speed c={c} is below the minimal speed c*={speed.c_star}")
    h = lambda lam: dispersion.mu(lam) - c * lam
    return float(optimize.bisect(h, 0.0, speed.lambda_star, xtol=xtol))
