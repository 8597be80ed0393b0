"""Problem parameters, the four drift families and the signed power.

The comparison ODE is

    d/dt (w')^(p-1) - T(t) (w')^(p-1) + lambda w^(p-1) = 0,
    w(a) = -1, w'(a) = 0,

with x^(q) := |x|^(q-1) x the signed power.  The drift T is one of

    T_0(t) =  (n-1) sqrt(kappa)  tan(sqrt(kappa) t)    kappa > 0,  |t| < pi/(2 sqrt(kappa))
    T_1(t) = -(n-1) sqrt(-kappa) coth(sqrt(-kappa) t)  kappa < 0,  t > 0
    T_2(t) = -(n-1) sqrt(-kappa)                       kappa < 0,  t real
    T_3(t) = -(n-1) sqrt(-kappa) tanh(sqrt(-kappa) t)  kappa < 0,  t real

These are the log-derivatives (up to sign) of the weights mu_i = tau_i^(n-1)
with tau = cos, sinh, exp, cosh; with the signs above, the ODE written in
divergence form is (mu (w')^(p-1))' + lambda mu w^(p-1) = 0, which reproduces
both displayed Neumann problems of the main comparison theorem.  Every T
satisfies the Riccati identity T' = T^2/(n-1) + (n-1) kappa on its domain.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularEndpointError

__all__ = [
    "Params",
    "ModelFamily",
    "family_for",
    "default_family_index",
    "drift",
    "weight_mu",
    "weight_tau",
    "signed_pow",
]


@dataclass(frozen=True)
class Params:
    """Shared problem data: exponent p, dimension parameter n, curvature
    kappa and (optionally) the diameter D.

    n may be any real >= 1, matching N in [1, inf] with n >= N; kappa must be
    nonzero.  When kappa > 0 and D is given, D <= pi/sqrt(kappa) is enforced.
    """

    p: float
    n: float
    kappa: float
    D: float | None = None

    def __post_init__(self):
        if not (self.p > 1.0):
            raise DomainError(f"p must be > 1, got {self.p}")
        if not (self.n >= 1.0):
            raise DomainError(f"n must be >= 1, got {self.n}")
        if self.kappa == 0.0 or not math.isfinite(self.kappa):
            raise DomainError("kappa must be finite and nonzero")
        if self.D is not None:
            if not (self.D > 0.0):
                raise DomainError(f"D must be > 0, got {self.D}")
            if self.kappa > 0.0 and self.D > math.pi / math.sqrt(self.kappa) * (1 + 1e-12):
                raise DomainError(
                    f"D={self.D} exceeds pi/sqrt(kappa)={math.pi / math.sqrt(self.kappa)}"
                )

    @property
    def sqrt_abs_kappa(self):
        return math.sqrt(abs(self.kappa))

    def with_diameter(self, D):
        return Params(self.p, self.n, self.kappa, D)


@dataclass(frozen=True)
class ModelFamily:
    """One of the four drift models: index, open domain (lo, hi) and the
    endpoints (if any) where the drift is singular."""

    index: int
    lo: float
    hi: float
    singular_lo: bool = False
    singular_hi: bool = False

    def contains(self, t):
        return self.lo < t < self.hi


def default_family_index(kappa):
    """Model used in the main comparison theorem: 0 for kappa>0, 3 for kappa<0."""
    return 0 if kappa > 0 else 3


def family_for(params, index):
    """Construct the ModelFamily ``index`` for ``params``, validating the
    curvature sign (family 0 needs kappa>0, families 1-3 need kappa<0)."""
    if index not in (0, 1, 2, 3):
        raise DomainError(f"family index must be one of 0,1,2,3, got {index}")
    if index == 0:
        if params.kappa <= 0:
            raise DomainError("family 0 requires kappa > 0")
        edge = math.pi / (2.0 * math.sqrt(params.kappa))
        return ModelFamily(0, -edge, edge, singular_lo=True, singular_hi=True)
    if params.kappa >= 0:
        raise DomainError(f"family {index} requires kappa < 0")
    if index == 1:
        return ModelFamily(1, 0.0, math.inf, singular_lo=True)
    return ModelFamily(index, -math.inf, math.inf)


def _as_family(params, family):
    if isinstance(family, ModelFamily):
        return family
    return family_for(params, int(family))


def _check_domain(fam, t, closure=False):
    scale = max(abs(fam.lo), abs(fam.hi), 1.0)
    pad = 4.0 * np.finfo(float).eps * (scale if math.isfinite(scale) else 1.0)
    if closure:
        if fam.lo - pad <= t <= fam.hi + pad:
            return
        raise DomainError(f"t={t} outside the closure of family {fam.index} domain")
    if fam.lo < t < fam.hi:
        # interior, but reject points numerically glued to a singular endpoint
        if fam.singular_lo and t - fam.lo <= pad:
            raise SingularEndpointError(
                f"t={t} is at the singular left endpoint of family {fam.index}"
            )
        if fam.singular_hi and fam.hi - t <= pad:
            raise SingularEndpointError(
                f"t={t} is at the singular right endpoint of family {fam.index}"
            )
        return
    if fam.singular_lo and abs(t - fam.lo) <= pad:
        raise SingularEndpointError(
            f"t={t} is at the singular left endpoint of family {fam.index}"
        )
    if fam.singular_hi and abs(t - fam.hi) <= pad:
        raise SingularEndpointError(
            f"t={t} is at the singular right endpoint of family {fam.index}"
        )
    raise DomainError(f"t={t} outside family {fam.index} domain ({fam.lo}, {fam.hi})")


def drift(family, params, t):
    """Drift T_i(t) of the model ODE (see module docstring for the table)."""
    fam = _as_family(params, family)
    t = float(t)
    _check_domain(fam, t)
    return _drift_unchecked(fam.index, params, t)


def _drift_unchecked(index, params, t):
    m = params.n - 1.0
    root = params.sqrt_abs_kappa
    t_arr = np.asarray(t, dtype=float)
    if index == 0:
        out = m * root * np.tan(root * t_arr)
    elif index == 1:
        out = -m * root / np.tanh(root * t_arr)
    elif index == 2:
        out = -m * root * np.ones_like(t_arr)
    else:
        out = -m * root * np.tanh(root * t_arr)
    return out if np.ndim(t) else float(out)


def weight_tau(family, params, t):
    """tau_i(t): cos, sinh, exp or cosh of sqrt(|kappa|) t per family."""
    fam = _as_family(params, family)
    root = params.sqrt_abs_kappa
    t = np.asarray(t, dtype=float)
    if fam.index == 0:
        out = np.cos(root * t)
    elif fam.index == 1:
        out = np.sinh(root * t)
    elif fam.index == 2:
        out = np.exp(root * t)
    else:
        out = np.cosh(root * t)
    return out if out.ndim else float(out)


def weight_mu(family, params, t):
    """mu_i(t) = tau_i(t)^(n-1), the model's weight; nonnegative on the
    closure of the family domain."""
    fam = _as_family(params, family)
    t_arr = np.asarray(t, dtype=float)
    for ti in np.atleast_1d(t_arr):
        _check_domain(fam, float(ti), closure=True)
    tau = np.asarray(weight_tau(fam, params, t_arr), dtype=float)
    out = np.maximum(tau, 0.0) ** (params.n - 1.0)
    return out if np.ndim(t) else float(out)


def signed_pow(x, q):
    """Signed power x^(q) = |x|^(q-1) x, with signed_pow(0, q) = 0.

    Odd and strictly increasing in x for q > 0.
    """
    if not (q > 0.0):
        raise DomainError(f"signed_pow requires q > 0, got {q}")
    x_arr = np.asarray(x, dtype=float)
    out = np.sign(x_arr) * np.abs(x_arr) ** q
    return out if np.ndim(x) else float(out)
