"""Space-time periodic, divergence-free, mean-zero advection fields.

Every field has period 1 in each spatial coordinate and in time.  The 2-D
parametric fields come from stream functions, so they are solenoidal by
construction; tabulated fields are interpolated from lattice data and can
be audited with :func:`divergence_residual` and :func:`mean_residual`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .errors import ShapeError

TWO_PI = 2.0 * np.pi

KINDS = ("zero", "shear", "cellular", "tabulated")


@dataclass(frozen=True, eq=False)
class FieldSpec:
    """Parametric description of b(x, t).

    ``m`` holds the integer spatial frequencies (m1, m2).  The shear field
    only uses m2, the cellular field uses both.  ``data`` is only used by
    tabulated fields and has shape (n_t, n, n, 2) on the lattice
    x_i = i/n, t_j = j/n_t.
    """

    kind: str = "zero"
    amplitude: float = 0.0
    m: Tuple[int, int] = (1, 1)
    eps_t: float = 0.0
    m_t: int = 1
    dim: int = 2
    data: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.dim not in (1, 2):
            raise ValueError("only N = 1 or N = 2 is supported")
        if self.dim == 1 and self.kind != "zero":
            raise ValueError("the only mean-zero incompressible 1-D field is b = 0")
        if not 0.0 <= self.eps_t <= 1.0:
            raise ValueError("eps_t must lie in [0, 1]")
        if int(self.m_t) != self.m_t or any(int(mi) != mi for mi in self.m):
            raise ValueError("frequencies must be integers")
        if self.kind == "tabulated":
            data = np.asarray(self.data, dtype=float)
            if data.ndim != 4 or data.shape[-1] != 2 or data.shape[1] != data.shape[2]:
                raise ShapeError(
                    f"tabulated data must have shape (n_t, n, n, 2), got {data.shape}")
            data.setflags(write=False)
            object.__setattr__(self, "data", data)

    @property
    def separable(self):
        """True when b(x, t) = b0(x) * modulation(t)."""
        return self.kind != "tabulated"

    def modulation(self, t):
        return 1.0 + self.eps_t * np.sin(TWO_PI * self.m_t * t)

    def sup_norm(self):
        """Upper bound for max |b| over the space-time cell."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "tabulated":
            return float(np.max(np.linalg.norm(self.data, axis=-1)))
        m1, m2 = self.m
        peak = abs(self.amplitude) * (1.0 + self.eps_t)
        if self.kind == "shear":
            return peak
        return peak * float(np.hypot(m1, m2))


def zero(dim=2):
    return FieldSpec("zero", dim=dim)


def shear(amplitude=1.0, m2=1, eps_t=0.0, m_t=1):
    return FieldSpec("shear", amplitude, (1, m2), eps_t, m_t)


def cellular(amplitude=1.0, m=(1, 1), eps_t=0.0, m_t=1):
    return FieldSpec("cellular", amplitude, tuple(m), eps_t, m_t)


def tabulated(data):
    return FieldSpec("tabulated", data=np.array(data, dtype=float))


def spatial_velocity(spec, x1, x2=None):
    """Time-independent factor b0(x) of a separable field, broadcast over x."""
    x1 = np.asarray(x1, dtype=float)
    if spec.dim == 1:
        return (np.zeros_like(x1),)
    x2 = np.asarray(x2, dtype=float)
    shape = np.broadcast_shapes(x1.shape, x2.shape)
    if spec.kind == "zero":
        return np.zeros(shape), np.zeros(shape)
    A = spec.amplitude
    m1, m2 = spec.m
    if spec.kind == "shear":
        return (np.broadcast_to(A * np.sin(TWO_PI * m2 * x2), shape).copy(),
                np.zeros(shape))
    if spec.kind == "cellular":
        # psi = A/(2 pi) sin(2 pi m1 x1) sin(2 pi m2 x2); b = (psi_x2, -psi_x1)
        s1, c1 = np.sin(TWO_PI * m1 * x1), np.cos(TWO_PI * m1 * x1)
        s2, c2 = np.sin(TWO_PI * m2 * x2), np.cos(TWO_PI * m2 * x2)
        return A * m2 * s1 * c2, -A * m1 * c1 * s2
    raise ValueError("tabulated fields are not separable")


def _interp_tabulated(data, x1, x2, t):
    n_t, n = data.shape[0], data.shape[1]
    x1, x2, t = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x1, x2, t)))
    coords = [np.mod(t, 1.0) * n_t, np.mod(x1, 1.0) * n, np.mod(x2, 1.0) * n]
    sizes = (n_t, n, n)
    lo = [np.floor(c).astype(int) for c in coords]
    frac = [c - l for c, l in zip(coords, lo)]
    out = np.zeros(x1.shape + (2,))
    for corner in range(8):
        bits = [(corner >> d) & 1 for d in range(3)]
        weight = np.ones(x1.shape)
        idx = []
        for d in range(3):
            weight = weight * (frac[d] if bits[d] else 1.0 - frac[d])
            idx.append((lo[d] + bits[d]) % sizes[d])
        out += weight[..., None] * data[idx[0], idx[1], idx[2]]
    return out[..., 0], out[..., 1]


def velocity(spec, x1, x2=None, t=0.0):
    """Vectorized b(x, t); returns a tuple with one array per component."""
    if spec.kind == "tabulated":
        return _interp_tabulated(spec.data, x1, x2, t)
    g = spec.modulation(t)
    return tuple(g * comp for comp in spatial_velocity(spec, x1, x2))


def evaluate(spec, x, t):
    """b(x, t) at a single point ``x`` (length N sequence)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (spec.dim,):
        raise ShapeError(f"point has shape {x.shape}, field dimension is {spec.dim}")
    comps = velocity(spec, *x, t=t) if spec.dim == 2 else velocity(spec, x[0], t=t)
    return np.array([float(c) for c in comps])


@dataclass(frozen=True)
class CellGrid:
    """Uniform discretization of the unit cell times one time period."""

    dim: int = 2
    n_x: int = 64
    n_t: int = 512

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if self.n_x < 8 or self.n_x & (self.n_x - 1):
            raise ValueError("n_x must be a power of two and at least 8")
        if self.n_t < 16:
            raise ValueError("n_t must be at least 16")

    @property
    def h(self):
        return 1.0 / self.n_x

    @property
    def dt(self):
        return 1.0 / self.n_t

    @property
    def shape(self):
        return (self.n_x,) * self.dim

    def nodes(self):
        """Coordinate arrays (ij indexing), one per spatial dimension."""
        x = np.arange(self.n_x) * self.h
        if self.dim == 1:
            return (x,)
        return tuple(np.meshgrid(x, x, indexing="ij"))

    def times(self):
        return np.arange(self.n_t) * self.dt


def sample(spec, grid, t):
    """Field components on the cell grid at time ``t``."""
    return velocity(spec, *grid.nodes(), t=t)


def _wavenumbers(n):
    k = TWO_PI * np.fft.fftfreq(n, d=1.0 / n)
    k[n // 2] = 0.0
    return k


def divergence_residual(spec, grid):
    """Max over grid nodes and time slices of a spectral estimate of div b."""
    if spec.dim == 1 or spec.kind == "zero":
        return 0.0
    k = _wavenumbers(grid.n_x)
    worst = 0.0
    for t in grid.times():
        b1, b2 = sample(spec, grid, t)
        div_hat = 1j * k[:, None] * np.fft.fft2(b1) + 1j * k[None, :] * np.fft.fft2(b2)
        worst = max(worst, float(np.max(np.abs(np.fft.ifft2(div_hat).real))))
    return worst


def mean_residual(spec, grid):
    """|space-time average| of each component (trapezoid rule on the periodic grid)."""
    total = np.zeros(spec.dim)
    for t in grid.times():
        total += [np.mean(c) for c in sample(spec, grid, t)]
    return np.abs(total / grid.n_t)


def load_tabulated_csv(path):
    """Read (x1, x2, t, b1, b2) rows on a uniform lattice into a tabulated field."""
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].lstrip().startswith("#"):
                continue
            try:
                rows.append([float(v) for v in rec])
            except ValueError:
                continue  # header row
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 5:
        raise ShapeError(f"{path}: expected 5 columns (x1, x2, t, b1, b2)")
    xs = np.unique(arr[:, 0])
    ys = np.unique(arr[:, 1])
    ts = np.unique(arr[:, 2])
    n, n_t = len(xs), len(ts)
    if len(ys) != n or len(arr) != n * n * n_t:
        raise ShapeError(f"{path}: rows do not form a full n x n x n_t lattice")
    data = np.empty((n_t, n, n, 2))
    i = np.rint(arr[:, 0] * n).astype(int) % n
    j = np.rint(arr[:, 1] * n).astype(int) % n
    m = np.rint(arr[:, 2] * n_t).astype(int) % n_t
    data[m, i, j] = arr[:, 3:5]
    return tabulated(data)


def tabulate(spec, n, n_t):
    """Sample a field on the (n_t, n, n) lattice, e.g. to build a tabulated field."""
    x = np.arange(n) / n
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    data = np.empty((n_t, n, n, 2))
    for j in range(n_t):
        b1, b2 = velocity(spec, X1, X2, j / n_t)
        data[j, ..., 0] = b1
        data[j, ..., 1] = b2
    return data
