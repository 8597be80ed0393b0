"""Independent discretized solvers used to validate the shooting results.

Three routes, none of which touches the phase-plane code:

* a weighted Sturm-Liouville finite-difference eigensolver at p = 2
  (conservative finite volumes, ghost-free Neumann closure, second order),
* a projected-descent Rayleigh-quotient minimizer at general p, giving a
  variational upper bound for the discrete first nonzero Neumann eigenvalue,
* a finite-difference Laplace-Beltrami eigensolver on the warped cylinder
  [-D/2, D/2] x S^1 with metric dt^2 + f(t)^2 dtheta^2, f = c*cosh(bt),
  the desk-scale version of the sharpness construction.

The p = 2 weight is cos^(n-1)(sqrt(kappa) t) for kappa > 0 and
cosh^(n-1)(sqrt(-kappa) t) for kappa < 0, so that the divergence form
(rho w')' + lambda rho w = 0 reproduces the comparison ODE's drift.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.linalg import cho_solve_banded, cholesky_banded
from scipy.optimize import brentq
from scipy.sparse.linalg import splu

from .errors import ConvergenceError, DomainError
from .model import signed_pow

__all__ = [
    "WeightedGrid",
    "RayleighResult",
    "WarpedMesh",
    "fd_eigenvalue_p2",
    "rayleigh_minimize_p",
    "warped_p2_eigenvalue",
]

_INVERSE_ITER_TOL = 1e-12
_INVERSE_ITER_CAP = 500


@dataclass
class WeightedGrid:
    """Uniform nodes on [-D/2, D/2] with a positive weight rho.

    ``rho`` holds node values, ``rho_mid`` midpoint values (used by the
    conservative fluxes).  Interior node weights must be positive; the
    endpoint weight may vanish (full-domain model problems).
    """

    t: np.ndarray
    rho: np.ndarray
    rho_mid: np.ndarray

    def __post_init__(self):
        if len(self.t) < 17:
            raise DomainError("WeightedGrid needs J >= 16 (at least 17 nodes)")
        if np.any(self.rho[1:-1] <= 0.0) or np.any(self.rho_mid <= 0.0):
            raise DomainError("weight must be positive at interior nodes")

    @property
    def h(self):
        return float(self.t[1] - self.t[0])

    @classmethod
    def from_callable(cls, D, J, weight):
        t = np.linspace(-0.5 * D, 0.5 * D, J + 1)
        mid = 0.5 * (t[:-1] + t[1:])
        return cls(t=t, rho=np.asarray(weight(t), dtype=float),
                   rho_mid=np.asarray(weight(mid), dtype=float))

    @classmethod
    def from_params(cls, params, J):
        D = params.D
        if D is None:
            raise DomainError("Params.D is required to build a WeightedGrid")
        root = params.sqrt_abs_kappa
        m = params.n - 1.0
        if params.kappa > 0:
            weight = lambda t: np.maximum(np.cos(root * t), 0.0) ** m
        else:
            weight = lambda t: np.cosh(root * t) ** m
        return cls.from_callable(D, J, weight)


def _fd_matrices(grid):
    """Conservative tridiagonal A and diagonal B with A w = lambda B w."""
    h = grid.h
    J = len(grid.t) - 1
    lower = -grid.rho_mid / h
    diag = np.zeros(J + 1)
    diag[0] = grid.rho_mid[0] / h
    diag[-1] = grid.rho_mid[-1] / h
    diag[1:-1] = (grid.rho_mid[:-1] + grid.rho_mid[1:]) / h
    cell = np.full(J + 1, h)
    cell[0] = cell[-1] = 0.5 * h
    b_diag = grid.rho * cell
    return diag, lower, b_diag


def _tridiag_matvec(diag, lower, x):
    y = diag * x
    y[:-1] += lower * x[1:]
    y[1:] += lower * x[:-1]
    return y


def fd_eigenvalue_p2(grid):
    """First nonzero Neumann eigenvalue of (rho w')' + lambda rho w = 0.

    Shifted inverse iteration on the conservative three-point scheme, with
    the constant mode deflated in the rho-weighted inner product; second
    order in 1/J.
    """
    diag, lower, b_diag = _fd_matrices(grid)
    D = float(grid.t[-1] - grid.t[0])
    sigma = 1e-3 * (math.pi / D) ** 2
    # banded upper form for cholesky_banded: row 0 superdiagonal, row 1 diagonal
    ab = np.zeros((2, len(diag)))
    ab[0, 1:] = lower
    ab[1] = diag + sigma * b_diag
    cb = cholesky_banded(ab)

    ones = np.ones_like(diag)
    b_ones = b_diag  # B @ 1
    b_mass = float(b_diag.sum())

    v = grid.t.copy()
    v -= (b_diag @ v) / b_mass
    v /= math.sqrt(b_diag @ v**2)
    lam = math.inf
    for _ in range(_INVERSE_ITER_CAP):
        x = cho_solve_banded((cb, False), b_diag * v)
        x -= (b_ones @ x) / b_mass
        x /= math.sqrt(b_diag @ x**2)
        ax = _tridiag_matvec(diag, lower, x)
        lam = float(x @ ax)  # x is B-normalized
        resid = np.linalg.norm(ax - lam * b_diag * x) / (abs(lam) * np.linalg.norm(b_diag * x))
        v = x
        if resid < _INVERSE_ITER_TOL:
            return lam
    raise ConvergenceError(f"inverse iteration stalled at residual {resid:.2e}")


@dataclass
class RayleighResult:
    """Variational upper bound with its minimizer and diagnostics."""

    lambda0: float
    minimizer: np.ndarray
    constraint_residual: float
    stagnated: bool = False
    iterations: int = 0


def _project_zero_pmean(w, weights, p):
    """Shift w by the constant making sum(weights * (w-s)^(p-1)) vanish."""
    def psi(s):
        return float(weights @ signed_pow(w - s, p - 1.0))

    lo, hi = float(np.min(w)) - 1.0, float(np.max(w)) + 1.0
    return w - brentq(psi, lo, hi, xtol=1e-15, rtol=8.9e-16)


def rayleigh_minimize_p(grid, p, iters=20000):
    """Minimize the discrete p-Rayleigh quotient over the zero-p-mean class.

    Projected descent with backtracking; iterates are kept sup-normalized and
    repro jected onto the constraint after every step.  Restarts from three
    deterministic shapes (odd linear, sin_p profile, fixed-seed noise) and
    keeps the best minimum.  Always an upper bound for the discrete first
    nonzero Neumann eigenvalue.
    """
    if not p > 1.0:
        raise DomainError(f"p must be > 1, got {p}")
    h = grid.h
    node_w = grid.rho.copy()
    cell = np.full(len(node_w), h)
    cell[0] = cell[-1] = 0.5 * h
    den_w = node_w * cell          # weights of sum rho |w|^p h
    mid_w = grid.rho_mid * h ** (1.0 - p)

    def quotient(w):
        num = float(mid_w @ np.abs(np.diff(w)) ** p)
        den = float(den_w @ np.abs(w) ** p)
        return num / den

    def gradient(w):
        d = signed_pow(np.diff(w), p - 1.0) * mid_w
        gn = np.zeros_like(w)
        gn[:-1] -= d
        gn[1:] += d
        gn *= p
        num = float(mid_w @ np.abs(np.diff(w)) ** p)
        den = float(den_w @ np.abs(w) ** p)
        gd = p * den_w * signed_pow(w, p - 1.0)
        return (gn - (num / den) * gd) / den

    from .ptrig import pi_p, sin_p

    t = grid.t
    D = float(t[-1] - t[0])
    rng = np.random.default_rng(1234)
    starts = [
        t - t.mean(),
        sin_p(p, pi_p(p) * (t - t[0]) / D - 0.5 * pi_p(p)),
        rng.standard_normal(len(t)),
    ]

    best = None
    for w0 in starts:
        w = _project_zero_pmean(np.asarray(w0, dtype=float), den_w, p)
        w = w / np.max(np.abs(w))
        value = quotient(w)
        eta = 1.0 / max(value, 1.0)
        stagnated = False
        it = 0
        while it < iters:
            it += 1
            g = gradient(w)
            accepted = False
            for _ in range(45):
                cand = w - eta * g
                cand = _project_zero_pmean(cand, den_w, p)
                cand = cand / np.max(np.abs(cand))
                cand_value = quotient(cand)
                if cand_value < value:
                    accepted = True
                    break
                eta *= 0.5
            if not accepted:
                stagnated = it < iters
                break
            improvement = (value - cand_value) / value
            w, value = cand, cand_value
            eta *= 1.3
            if improvement < 1e-14:
                break
        resid = abs(float(den_w @ signed_pow(w, p - 1.0)))
        result = RayleighResult(lambda0=value, minimizer=w,
                                constraint_residual=resid,
                                stagnated=stagnated, iterations=it)
        if best is None or result.lambda0 < best.lambda0:
            best = result
    return best


@dataclass
class WarpedMesh:
    """Tensor grid on [-D/2, D/2] x [0, 2 pi) with warp f(t) = scale*cosh(bt).

    The surface metric is dt^2 + f(t)^2 dtheta^2 (one angular dimension, so
    this is the n = 2 member of the sharpness family).  ``warp`` may override
    f, e.g. a constant for the product-cylinder sanity check.
    """

    D: float
    kappa: float
    scale: float
    nt: int = 256
    ntheta: int = 64
    warp: object = field(default=None, repr=False)

    def __post_init__(self):
        if self.kappa >= 0:
            raise DomainError("warped mesh requires kappa < 0")
        if self.scale <= 0 or self.D <= 0:
            raise DomainError("scale and D must be positive")
        if self.nt < 8 or self.ntheta < 8:
            raise DomainError("mesh too coarse")

    def f(self, t):
        if self.warp is not None:
            return np.asarray(self.warp(t), dtype=float)
        beta = math.sqrt(-self.kappa)
        return self.scale * np.cosh(beta * np.asarray(t, dtype=float))


def _warped_matrices(mesh):
    """Sparse A and diagonal B for the finite-volume Laplace-Beltrami
    eigenproblem A u = lambda B u (Neumann in t, periodic in theta)."""
    nt, ntheta = mesh.nt, mesh.ntheta
    t = np.linspace(-0.5 * mesh.D, 0.5 * mesh.D, nt + 1)
    ht = t[1] - t[0]
    htheta = 2.0 * math.pi / ntheta
    f_node = mesh.f(t)
    f_mid = mesh.f(0.5 * (t[:-1] + t[1:]))
    ct = np.full(nt + 1, ht)
    ct[0] = ct[-1] = 0.5 * ht

    def idx(i, j):
        return i * ntheta + (j % ntheta)

    rows, cols, vals = [], [], []

    def add_edge(a, b, c):
        rows.extend((a, b, a, b))
        cols.extend((a, b, b, a))
        vals.extend((c, c, -c, -c))

    for i in range(nt):
        cond_t = f_mid[i] * htheta / ht
        for j in range(ntheta):
            add_edge(idx(i, j), idx(i + 1, j), cond_t)
    for i in range(nt + 1):
        cond_th = ct[i] / (f_node[i] * htheta)
        for j in range(ntheta):
            add_edge(idx(i, j), idx(i, j + 1), cond_th)

    size = (nt + 1) * ntheta
    A = sparse.coo_matrix((vals, (rows, cols)), shape=(size, size)).tocsc()
    b_diag = np.repeat(f_node * ct, ntheta) * htheta
    return A, b_diag, t


def warped_p2_eigenvalue(mesh):
    """First nonzero Neumann eigenvalue of the Laplace-Beltrami operator on
    the warped cylinder, by shifted inverse iteration with constant-mode
    deflation (second-order finite differences)."""
    A, b_diag, t = _warped_matrices(mesh)
    sigma = 1e-3 * (math.pi / mesh.D) ** 2
    M = (A + sigma * sparse.diags(b_diag)).tocsc()
    lu = splu(M)
    b_mass = float(b_diag.sum())

    v = np.repeat(t, mesh.ntheta).astype(float)
    v -= (b_diag @ v) / b_mass
    v /= math.sqrt(b_diag @ v**2)
    for _ in range(_INVERSE_ITER_CAP):
        x = lu.solve(b_diag * v)
        x -= (b_diag @ x) / b_mass
        x /= math.sqrt(b_diag @ x**2)
        ax = A @ x
        lam = float(x @ ax)
        resid = np.linalg.norm(ax - lam * b_diag * x) / (abs(lam) * np.linalg.norm(b_diag * x))
        v = x
        if resid < _INVERSE_ITER_TOL:
            return lam
    raise ConvergenceError(f"inverse iteration stalled at residual {resid:.2e}")
