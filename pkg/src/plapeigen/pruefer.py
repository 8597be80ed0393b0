"""Phase-amplitude integration of the comparison ODE.

With alpha = (lambda/(p-1))^(1/p), the substitution

    alpha * w = e * sin_p(phi),    w' = e * cos_p(phi)

turns the half-linear model equation into the decoupled first-order system

    phi'        = alpha - T(t)/(p-1) * cos_p(phi)^(p-1) * sin_p(phi)
    (log e)'    = T(t)/(p-1) * |cos_p(phi)|^p

with phi(a) = -pi_p/2 and e(a) = alpha (so w(a) = -1, w'(a) = 0).  Here
cos_p^(p-1) is the signed power.  The (w, w') form degenerates at critical
points of w for p != 2; the phase system stays smooth, so all integration
happens here and w is only ever reconstructed afterwards.

Singular starts (family 0 at -pi/(2 sqrt(kappa)), family 1 at 0) have
T ~ -(n-1)/(t-a); the unique continuation behaves like
phi(a+u) = -pi_p/2 + alpha*u/n + O(u^2), which is the start state used at a
small offset eps.  Halving eps moves delta and m by O(eps^2), which the test
suite checks (Richardson consistency).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid, solve_ivp
from scipy.optimize import brentq

from .errors import DomainError, IntegrationFailureError, StateError
from .model import ModelFamily, Params, _as_family, _drift_unchecked, signed_pow, weight_mu
from .ptrig import _sincos_p, pi_p

__all__ = [
    "PrueferState",
    "Trajectory",
    "SolutionProfile",
    "EnvelopeDiagnostic",
    "alpha_from_lambda",
    "lambda_from_alpha",
    "integrate_pruefer",
    "reconstruct_profile",
    "e_function",
]

#: steps near the phase boundary are meaningless below this offset
_SINGULAR_EPS_FLOOR = 1e-8


def alpha_from_lambda(p, lam):
    """alpha = (lambda/(p-1))^(1/p)."""
    if not (lam > 0.0):
        raise DomainError(f"lambda must be > 0, got {lam}")
    return (lam / (p - 1.0)) ** (1.0 / p)


def lambda_from_alpha(p, alpha):
    """lambda = (p-1) alpha^p, the inverse of alpha_from_lambda."""
    if not (alpha > 0.0):
        raise DomainError(f"alpha must be > 0, got {alpha}")
    return (p - 1.0) * alpha**p


@dataclass(frozen=True)
class PrueferState:
    """Phase-amplitude state at one time: (t, phi, log_e)."""

    t: float
    phi: float
    log_e: float


@dataclass
class Trajectory:
    """Integrated (phi, log e) path plus the defining data.

    ``t``/``phi``/``log_e`` are the accepted solver steps (strictly increasing
    in t, starting from the exact initial state).  ``b`` is the first time phi
    reaches pi_p/2, or None when the horizon was hit first.  Instances are
    immutable by convention once returned and safe to share across workers.
    """

    t: np.ndarray
    phi: np.ndarray
    log_e: np.ndarray
    alpha: float
    lam: float
    family: ModelFamily
    params: Params
    a: float
    phi0: float
    reached_top: bool
    b: float | None
    start_offset: float = 0.0
    _dense: object = field(default=None, repr=False)

    @property
    def samples(self):
        """Ordered list of PrueferState, one per accepted step."""
        return [PrueferState(float(ti), float(pi_), float(le)) for ti, pi_, le in zip(self.t, self.phi, self.log_e)]

    def evaluate(self, t):
        """Dense (phi, log_e) at time(s) t within [a, t[-1]]."""
        t_arr = np.asarray(t, dtype=float)
        lo = self.t[0] if self.start_offset == 0.0 else self.a + self.start_offset
        t_clip = np.clip(t_arr, lo, self.t[-1])
        out = self._dense(t_clip)
        phi, log_e = out[0], out[1]
        if self.start_offset > 0.0:
            # asymptotic stub below the regularized start
            below = t_arr < lo
            if np.any(below):
                u = np.maximum(t_arr - self.a, 0.0)
                phi_s, le_s = _singular_start_state(self.params, self.alpha, u, self.phi0)
                phi = np.where(below, phi_s, phi)
                log_e = np.where(below, le_s, log_e)
        if np.ndim(t):
            return phi, log_e
        return float(phi), float(log_e)

    def w_and_derivative(self, t):
        """Reconstructed (w, w') at time(s) t."""
        phi, log_e = self.evaluate(t)
        s, c = _sincos_p(self.params.p, phi)
        e = np.exp(log_e)
        w = e / self.alpha * s
        w_prime = e * c
        if np.ndim(t):
            return w, w_prime
        return float(w), float(w_prime)


def _singular_start_state(params, alpha, u, phi0):
    """(phi, log_e) at offset u past a singular start where T ~ -(n-1)/u."""
    n, p = params.n, params.p
    gamma = p / (p - 1.0)
    phi = phi0 + alpha * u / n
    log_e = math.log(alpha) - (n - 1.0) * (p - 1.0) ** (gamma - 1.0) * (alpha / n) ** gamma * np.asarray(u) ** gamma / gamma
    return phi, log_e


def _phase_rhs(fam_index, params, alpha):
    p = params.p
    pm1 = p - 1.0

    def rhs(t, y):
        s, c = _sincos_p(p, y[0])
        cm_p = max(1.0 - abs(s) ** p, 0.0)  # |cos_p|^p
        c_pow = math.copysign(cm_p ** (pm1 / p), c) if cm_p > 0.0 else 0.0
        T = _drift_unchecked(fam_index, params, t)
        return (alpha - T / pm1 * c_pow * s, T / pm1 * cm_p)

    return rhs


def integrate_pruefer(family, params, a, lam, t_max=None, tol=1e-10, stop_at_top=True,
                      phi0=None, log_e0=None, stall_event=False):
    """Integrate the phase-amplitude system from ``a`` with local error ``tol``.

    Runs until phi reaches pi_p/2 (when ``stop_at_top``) or until ``t_max``
    (default a + 50*pi_p/alpha).  At a singular start the integration begins
    at a regularized offset; see the module docstring.  ``phi0``/``log_e0``
    override the standard initial state (-pi_p/2, log alpha); this is how the
    odd-solution shots with phi(0) = 0 are run.
    """
    fam = _as_family(params, family)
    p = params.p
    alpha = alpha_from_lambda(p, lam)
    half_pip = 0.5 * pi_p(p)
    a = float(a)
    if phi0 is None:
        phi0 = -half_pip
    if log_e0 is None:
        log_e0 = math.log(alpha)

    if not (fam.lo <= a < fam.hi):
        raise DomainError(f"start a={a} outside the closure of family {fam.index} domain")
    if t_max is None:
        t_max = a + 50.0 * pi_p(p) / alpha
    if fam.singular_hi and math.isfinite(fam.hi):
        edge_pad = max(1e-14, 64.0 * np.finfo(float).eps * abs(fam.hi))
        t_max = min(t_max, fam.hi - edge_pad)
    if not t_max > a:
        raise DomainError(f"t_max={t_max} must exceed a={a}")

    # regularized start when a sits on a singular endpoint
    start_offset = 0.0
    t0 = a
    scale = min(pi_p(p) / alpha, 1.0 / params.sqrt_abs_kappa)
    if fam.singular_lo and (a - fam.lo) <= 1e-12 * max(1.0, abs(fam.lo)):
        start_offset = max(_SINGULAR_EPS_FLOOR, math.sqrt(tol)) * scale
        t0 = a + start_offset
        phi0_run, log_e0_run = _singular_start_state(params, alpha, start_offset, phi0)
        log_e0_run = float(log_e0_run)
    else:
        phi0_run, log_e0_run = phi0, log_e0

    rhs = _phase_rhs(fam.index, params, alpha)
    events = []
    if stop_at_top:
        def top(t, y):
            return y[0] - half_pip
        top.terminal = True
        top.direction = 1.0
        events.append(top)
    if stall_event:
        def stalled(t, y):
            return rhs(t, y)[0]
        stalled.terminal = True
        stalled.direction = -1.0
        events.append(stalled)

    sol = solve_ivp(
        rhs, (t0, t_max), (phi0_run, log_e0_run),
        method="DOP853", rtol=tol, atol=tol * 1e-2,
        dense_output=True, events=events or None,
    )
    if sol.status == -1:
        last = (float(sol.t[-1]), float(sol.y[0, -1]), float(sol.y[1, -1]))
        raise IntegrationFailureError(f"integration failed: {sol.message}", last_state=last)

    reached_top = bool(stop_at_top and len(sol.t_events[0]) > 0)
    b = float(sol.t_events[0][0]) if reached_top else None

    t_out = sol.t
    y_out = sol.y
    if start_offset == 0.0 and t_out[0] > a:  # pragma: no cover - solve_ivp always includes t0
        t_out = np.concatenate([[a], t_out])
        y_out = np.column_stack([[phi0_run, log_e0_run], y_out])
    if start_offset > 0.0:
        # prepend the exact boundary state for contract fidelity
        t_out = np.concatenate([[a], t_out])
        y_out = np.column_stack([[phi0, math.log(alpha)], y_out])

    return Trajectory(
        t=t_out, phi=y_out[0], log_e=y_out[1],
        alpha=alpha, lam=lam, family=fam, params=params, a=a, phi0=phi0,
        reached_top=reached_top, b=b, start_offset=start_offset, _dense=sol.sol,
    )


@dataclass
class SolutionProfile:
    """Reconstructed solution samples plus first-critical-point data.

    ``b`` is the first critical point after ``a`` (inf when the phase never
    reached pi_p/2 before the horizon, in which case ``converged`` is False
    and ``m`` is nan), ``delta`` = b - a and ``m`` = w(b) > 0.
    """

    t: np.ndarray
    w: np.ndarray
    w_prime: np.ndarray
    b: float
    delta: float
    m: float
    converged: bool
    trajectory: Trajectory


def reconstruct_profile(traj, num_points=2001):
    """Rebuild (w, w') on a uniform grid from a trajectory.

    w = (e/alpha) sin_p(phi) and w' = e cos_p(phi); the critical point b is
    the phase-event time, delta = b - a, m = e(b)/alpha.
    """
    a = traj.a
    if traj.reached_top:
        b = traj.b
        _, log_e_b = traj.evaluate(b)
        m = math.exp(log_e_b) / traj.alpha
        converged = True
    else:
        b = math.inf
        m = math.nan
        converged = False
    t_end = traj.b if converged else float(traj.t[-1])
    grid = np.linspace(a, t_end, num_points)
    w, w_prime = traj.w_and_derivative(grid)
    if converged:
        w[-1], w_prime[-1] = m, 0.0  # exact at the located critical point
    return SolutionProfile(
        t=grid, w=np.asarray(w), w_prime=np.asarray(w_prime),
        b=b, delta=b - a, m=m, converged=converged, trajectory=traj,
    )


@dataclass
class EnvelopeDiagnostic:
    """Sampled E(s) on the usable subrange of (a, b) plus the zero t0 of w.

    E(s) = -exp(int_{t0}^s w^(p-1)/(w')^(p-1) dt) * int_a^s w^(p-1) dmu.
    The inner integrand diverges where w' -> 0 (both ends); the outer
    exponential is evaluated from t0 outward and the samples are clamped at
    the first non-finite partial sum.
    """

    t0: float
    s: np.ndarray
    E: np.ndarray


def find_first_zero(traj):
    """First zero t0 of w after a, located on the dense phase output."""
    lo = traj.a
    hi = traj.b if traj.reached_top else float(traj.t[-1])
    phi_lo, _ = traj.evaluate(lo)
    phi_hi, _ = traj.evaluate(hi)
    if not (phi_lo < 0.0 < phi_hi):
        raise StateError("w has no zero on the integrated range")
    return brentq(lambda t: traj.evaluate(t)[0], lo, hi, xtol=1e-14, rtol=8.9e-16)


def e_function(profile, family=None, params=None):
    """Sample the envelope comparison function E on the profile grid."""
    traj = profile.trajectory
    if family is None:
        family = traj.family
    if params is None:
        params = traj.params
    if not profile.converged:
        raise StateError("e_function requires a converged profile")
    p = params.p
    t0 = find_first_zero(traj)

    ts = np.unique(np.concatenate([profile.t, [t0]]))
    w, w_prime = traj.w_and_derivative(ts)
    mu = np.asarray(weight_mu(family, params, ts), dtype=float)

    # outer integral from a (bounded integrand)
    J = cumulative_trapezoid(signed_pow(w, p - 1.0) * mu, ts, initial=0.0)

    # inner integral anchored at t0; endpoints excluded (w' = 0 there)
    interior = slice(1, len(ts) - 1)
    t_in = ts[interior]
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        g = signed_pow(w[interior], p - 1.0) / signed_pow(w_prime[interior], p - 1.0)
        cum = cumulative_trapezoid(g, t_in, initial=0.0)
        idx0 = int(np.argmin(np.abs(t_in - t0)))
        inner = cum - cum[idx0]
        E = -np.exp(np.clip(inner, -745.0, 709.0)) * J[interior]

    # usable subrange: walk outward from t0, stop at the first bad sample
    finite = np.isfinite(E) & np.isfinite(g) & (np.abs(inner) < 700.0)
    lo = idx0
    while lo > 0 and finite[lo - 1]:
        lo -= 1
    hi = idx0
    while hi < len(t_in) - 1 and finite[hi + 1]:
        hi += 1
    sl = slice(lo, hi + 1)
    return EnvelopeDiagnostic(t0=t0, s=t_in[sl], E=E[sl])
