"""Independent reference computations used by the tests.

The dense monodromy oracle assembles the semi-discrete generator as an
explicit matrix from the closed-form periodic Fourier differentiation
matrices (no FFTs) and multiplies exact matrix exponentials over the period
using the fourth-order commutator-free Magnus rule at the two Gauss points.
"""

import numpy as np
from scipy.linalg import expm

from frontspeed import fields


def fourier_d1(n):
    """First-derivative matrix on n equispaced nodes of [0, 1), n even."""
    h = 2 * np.pi / n
    i = np.arange(n)
    diff = i[:, None] - i[None, :]
    with np.errstate(divide="ignore"):
        d = 0.5 * (-1.0) ** diff / np.tan(diff * h / 2)
    d[i, i] = 0.0
    return 2 * np.pi * d


def fourier_d2(n):
    """Second-derivative matrix (keeps the Nyquist mode) on [0, 1), n even."""
    h = 2 * np.pi / n
    i = np.arange(n)
    diff = i[:, None] - i[None, :]
    with np.errstate(divide="ignore"):
        d = -0.5 * (-1.0) ** diff / np.sin(diff * h / 2) ** 2
    d[i, i] = -np.pi ** 2 / (3 * h ** 2) - 1.0 / 6.0
    return (2 * np.pi) ** 2 * d


def generator(field, r, k, lam, n, t, eps=0.0, delta=0.0):
    """Dense matrix of w -> L_lambda w + w_t at time t, row-major (x1, x2) ordering."""
    d1, d2 = fourier_d1(n), fourier_d2(n)
    eye = np.eye(n)
    dx1, dx2 = np.kron(d1, eye), np.kron(eye, d1)
    lap = np.kron(d2, eye) + np.kron(eye, d2)
    x = np.arange(n) / n
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    b1, b2 = (c.ravel() for c in fields.velocity(field, X1, X2, t))
    bk = k[0] * b1 + k[1] * b2
    c0 = (1 + eps) * lam ** 2 + r - delta
    return (lap + (b1 - 2 * lam * k[0])[:, None] * dx1 + (b2 - 2 * lam * k[1])[:, None] * dx2
            + np.diag(c0 - lam * bk))


def dense_monodromy(field, r, k, lam, n, n_t, **kw):
    dt = 1.0 / n_t
    size = n * n
    M = np.eye(size)
    if field.kind == "zero" or (field.eps_t == 0 and field.kind != "tabulated"):
        return expm(generator(field, r, k, lam, n, 0.0, **kw))
    c = np.sqrt(3) / 6
    for j in range(n_t):
        A1 = generator(field, r, k, lam, n, (j + 0.5 - c) * dt, **kw)
        A2 = generator(field, r, k, lam, n, (j + 0.5 + c) * dt, **kw)
        # commutator-free fourth-order Magnus (Blanes-Moan CF4 pair)
        a, b = 0.25 + c, 0.25 - c
        M = expm(dt * (b * A1 + a * A2)) @ expm(dt * (a * A1 + b * A2)) @ M
    return M


def dense_mu(field, r, k, lam, n, n_t, **kw):
    """log of the dominant (real, positive) eigenvalue of the dense monodromy matrix."""
    ev = np.linalg.eigvals(dense_monodromy(field, r, k, lam, n, n_t, **kw))
    return float(np.log(np.max(ev.real)))


def smooth_positive_trial(grid, rng, modes=3, amp=0.3):
    """exp of a random trigonometric polynomial in (t, x1, x2): smooth, periodic, positive."""
    t = grid.times()[:, None, None]
    x1, x2 = (a[None] for a in grid.nodes())
    s = np.zeros((grid.n_t,) + grid.shape)
    for _ in range(modes):
        p, q, m = rng.integers(-2, 3, size=3)
        phase = rng.uniform(0, 2 * np.pi)
        s += rng.uniform(-amp, amp) * np.cos(2 * np.pi * (p * x1 + q * x2 + m * t) + phase)
    return np.exp(s)
