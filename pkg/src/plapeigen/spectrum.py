"""Eigenvalue-level solvers built on the phase-plane integrator.

lambda_D is the first nonzero Neumann eigenvalue of the comparison problem on
[-D/2, D/2] (family 0 for kappa > 0, family 3 for kappa < 0).  It is found by
shooting: the phase residual

    g(lambda) = phi_lambda(D/2) - pi_p/2

from a single shot with phi(-D/2) = -pi_p/2 is strictly increasing in lambda
(the phase equation's right side is increasing in alpha pointwise), so a sign
bracket plus safeguarded root finding pins the eigenvalue.  The first branch
(one sign change of w) characterizes the first nonzero eigenvalue.

Also here: odd-solution radii (the start -a_bar whose solution is odd),
the oscillation threshold alpha_bar for family 3, maximum maps m(i, a) and
the minimum model diameter as a function of lambda.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import (
    BelowLambda0Error,
    BracketFailureError,
    DomainError,
    InconclusiveError,
    MonotonicityError,
)
from .model import Params, _as_family, default_family_index, family_for
from .pruefer import (
    alpha_from_lambda,
    integrate_pruefer,
    lambda_from_alpha,
    reconstruct_profile,
)
from .ptrig import pi_p

__all__ = [
    "EigenResult",
    "OddSolutionRadius",
    "CriticalAlpha",
    "MaxMap",
    "SweepRow",
    "lambda_D",
    "neumann_phase_residual",
    "odd_solution_radius",
    "max_map",
    "critical_alpha",
    "min_diameter",
    "lambda_of_diameter_table",
]

_MAX_BRACKET_GROWTH = 60


@dataclass(frozen=True)
class EigenResult:
    """Eigenvalue with shooting diagnostics."""

    lam: float
    alpha: float
    residual: float
    iterations: int
    bracket: tuple[float, float]


@dataclass(frozen=True)
class OddSolutionRadius:
    """Radius a_bar > 0 such that the solution started at -a_bar is odd."""

    a_bar: float
    family: int
    alpha: float


@dataclass(frozen=True)
class CriticalAlpha:
    """Oscillation threshold for family 3, with detector metadata."""

    alpha_bar: float
    bracket_width: float
    horizon: float


@dataclass
class MaxMap:
    """Sampled maximum map m(i, a) = w_{i,a}(b(i, a))."""

    family: int
    a: np.ndarray
    m: np.ndarray
    converged: np.ndarray
    m2: float | None = None


@dataclass(frozen=True)
class SweepRow:
    """One diameter-sweep entry."""

    D: float
    lam: float
    alpha: float
    residual: float
    iterations: int


def _require_diameter(params):
    if params.D is None:
        raise DomainError("Params.D is required for an eigenvalue problem")
    return params.D


def neumann_phase_residual(params, family, lam, tol=1e-11):
    """g(lambda): phase mismatch at D/2 of a shot started at -D/2.

    The shot is not stopped at pi_p/2, so g is well defined (and increasing in
    lambda) on both sides of the eigenvalue.
    """
    D = _require_diameter(params)
    fam = _as_family(params, family)
    traj = integrate_pruefer(fam, params, -0.5 * D, lam, t_max=0.5 * D,
                             tol=tol, stop_at_top=False)
    phi_end, _ = traj.evaluate(0.5 * D)
    return phi_end - 0.5 * pi_p(params.p)


def lambda_D(params, tol=1e-9):
    """First nonzero Neumann eigenvalue of the comparison model on [-D/2, D/2].

    Bracketing starts from lambda_lo = (p-1)(pi_p/(2D))^p / 4 and grows the
    upper end geometrically until g changes sign; safeguarded bracketed root
    finding then drives the phase residual below ``tol``.
    """
    D = _require_diameter(params)
    p = params.p
    fam = family_for(params, default_family_index(params.kappa))
    ode_tol = min(1e-10, 0.1 * tol)

    evals = 0

    def g(lam):
        nonlocal evals
        evals += 1
        return neumann_phase_residual(params, fam, lam, tol=ode_tol)

    lam_lo = 0.25 * (p - 1.0) * (pi_p(p) / (2.0 * D)) ** p
    g_lo = g(lam_lo)
    shrink = 0
    while g_lo >= 0.0:
        shrink += 1
        if shrink > _MAX_BRACKET_GROWTH:
            raise BracketFailureError("no lower bracket for lambda_D")
        lam_lo *= 0.25
        g_lo = g(lam_lo)

    lam_hi = 4.0 * lam_lo
    g_hi = g(lam_hi)
    grow = 0
    while g_hi <= 0.0:
        grow += 1
        if grow > _MAX_BRACKET_GROWTH:
            raise BracketFailureError("no upper bracket for lambda_D within 60 doublings")
        lam_lo, g_lo = lam_hi, g_hi
        lam_hi *= 2.0
        g_hi = g(lam_hi)

    root = brentq(g, lam_lo, lam_hi, xtol=1e-13 * lam_hi, rtol=8.9e-16, maxiter=200)
    residual = g(root)
    # safeguarded fallback: plain bisection until the phase residual meets tol
    lo, hi = lam_lo, lam_hi
    guard = 0
    while abs(residual) > tol and guard < 200:
        guard += 1
        if residual > 0.0:
            hi = root
        else:
            lo = root
        root = 0.5 * (lo + hi)
        residual = g(root)

    return EigenResult(
        lam=root, alpha=alpha_from_lambda(p, root), residual=residual,
        iterations=evals, bracket=(lam_lo, lam_hi),
    )


def odd_solution_radius(family, params, alpha, tol=1e-11):
    """Time a_bar at which the phase shot from phi(0) = 0 reaches pi_p/2.

    Family 3: always finite (the drift speeds the phase up on both sides of
    zero).  Family 0: finite exactly when lambda > lambda_0; a stalled phase
    raises BelowLambda0Error.
    """
    fam = _as_family(params, family)
    if fam.index not in (0, 3):
        raise DomainError("odd solutions exist for families 0 and 3 only")
    if not (alpha > 0.0):
        raise DomainError(f"alpha must be > 0, got {alpha}")
    p = params.p
    lam = lambda_from_alpha(p, alpha)
    if fam.index == 3:
        t_max = 1.1 * pi_p(p) / (2.0 * alpha)
        traj = integrate_pruefer(fam, params, 0.0, lam, t_max=t_max, tol=tol,
                                 phi0=0.0, log_e0=math.log(alpha))
    else:
        traj = integrate_pruefer(fam, params, 0.0, lam, t_max=fam.hi, tol=tol,
                                 phi0=0.0, log_e0=math.log(alpha), stall_event=True)
    if not traj.reached_top:
        raise BelowLambda0Error(
            f"family-0 phase stalled before pi/(2 sqrt(kappa)); lambda={lam} <= lambda_0"
        )
    return OddSolutionRadius(a_bar=traj.b, family=fam.index, alpha=alpha)


def _map_ordered(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def max_map(family, params, lam, a_samples, tol=1e-10, workers=1):
    """m(i, a) for each start in ``a_samples`` (non-converged entries nan)."""
    fam = _as_family(params, family)

    def one(a):
        traj = integrate_pruefer(fam, params, float(a), lam, tol=tol)
        prof = reconstruct_profile(traj, num_points=3)
        return prof.m, prof.converged

    results = _map_ordered(one, list(a_samples), workers)
    m = np.array([r[0] for r in results])
    conv = np.array([r[1] for r in results], dtype=bool)
    m2 = None
    if fam.index == 2 and np.any(conv):
        m2 = float(np.median(m[conv]))
    return MaxMap(family=fam.index, a=np.asarray(list(a_samples), dtype=float),
                  m=m, converged=conv, m2=m2)


def critical_alpha(params, horizon=None, tol=1e-3, a_grid=None, detector_tol=1e-9,
                   workers=1):
    """Threshold alpha_bar separating oscillatory from stalled family-3 phases.

    Classifies each alpha as "finite" (the phase reaches pi_p/2 before the
    horizon for every sampled start) or "stalled" (it does not, with the phase
    speed collapsing at the horizon for some large start), then bisects the
    geometric bracket between the two behaviors down to width ``tol``.
    """
    if params.kappa >= 0:
        raise DomainError("critical_alpha is defined for kappa < 0")
    beta = params.sqrt_abs_kappa
    if horizon is None:
        horizon = 100.0 / beta
    if a_grid is None:
        a_grid = np.array([0.0, 1.0, 2.0, 5.0, 10.0, 20.0]) / beta
    fam = family_for(params, 3)
    stall_seen = {}

    def classify(alpha):
        lam = lambda_from_alpha(params.p, alpha)

        def one(a):
            traj = integrate_pruefer(fam, params, float(a), lam,
                                     t_max=float(a) + horizon, tol=detector_tol)
            if traj.reached_top:
                return True, math.inf
            # phase speed at the horizon, for the stall signature
            from .pruefer import _phase_rhs

            rhs = _phase_rhs(fam.index, params, alpha)
            dphi = rhs(traj.t[-1], (traj.phi[-1], traj.log_e[-1]))[0]
            return False, abs(dphi)

        outcomes = _map_ordered(one, list(a_grid), workers)
        finite = all(o[0] for o in outcomes)
        if not finite:
            speeds = [o[1] for o in outcomes if not o[0]]
            stall_seen[alpha] = min(speeds) < 1e-2 * alpha
        return finite

    alpha_hi = beta * max(params.n - 1.0, 1.0)
    grow = 0
    while not classify(alpha_hi):
        grow += 1
        if grow > _MAX_BRACKET_GROWTH:
            raise InconclusiveError("no oscillatory alpha found", {"horizon": horizon})
        alpha_hi *= 2.0
    alpha_lo = 0.5 * alpha_hi
    shrink = 0
    while classify(alpha_lo):
        shrink += 1
        if shrink > _MAX_BRACKET_GROWTH:
            raise InconclusiveError("no stalled alpha found", {"horizon": horizon})
        alpha_hi = alpha_lo
        alpha_lo *= 0.5

    while alpha_hi - alpha_lo > tol:
        mid = 0.5 * (alpha_lo + alpha_hi)
        if classify(mid):
            alpha_hi = mid
        else:
            alpha_lo = mid

    if not any(stall_seen.get(a, False) for a in stall_seen):
        raise InconclusiveError(
            "phase never showed a stall signature below the bracket; "
            "horizon is probably too small",
            {"horizon": horizon, "bracket": (alpha_lo, alpha_hi)},
        )
    return CriticalAlpha(alpha_bar=0.5 * (alpha_lo + alpha_hi),
                         bracket_width=alpha_hi - alpha_lo, horizon=horizon)


def min_diameter(params, lam, tol=1e-11):
    """Minimum diameter of the comparison model at eigenvalue ``lam``.

    2*a_bar from the family-3 odd solution for kappa < 0 (the minimizing
    start), 2*a_hat from family 0 for kappa > 0.
    """
    alpha = alpha_from_lambda(params.p, lam)
    index = 3 if params.kappa < 0 else 0
    return 2.0 * odd_solution_radius(index, params, alpha, tol=tol).a_bar


def lambda_of_diameter_table(params, D_grid, tol=1e-9, strict=True, workers=1):
    """lambda_D over an increasing diameter grid; strictly decreasing."""
    D_list = [float(D) for D in D_grid]
    if not D_list:
        raise DomainError("empty diameter grid")
    if any(b <= a for a, b in zip(D_list, D_list[1:])):
        raise DomainError("diameter grid must be strictly increasing")

    def one(D):
        res = lambda_D(params.with_diameter(D), tol=tol)
        return SweepRow(D=D, lam=res.lam, alpha=res.alpha,
                        residual=res.residual, iterations=res.iterations)

    rows = _map_ordered(one, D_list, workers)
    if strict:
        for r0, r1 in zip(rows, rows[1:]):
            if not r1.lam < r0.lam:
                raise MonotonicityError(
                    f"lambda_D not strictly decreasing: D={r0.D}->{r1.D} "
                    f"gave {r0.lam} -> {r1.lam}"
                )
    return rows
