"""Opportunity-sensitive welfare and its equivalent representations.

Type expected utilities ``U_s`` are aggregated with an exponential transform
of strength ``theta`` (aversion to inequality of opportunity).  ``theta = 0``
is utilitarian, ``theta = inf`` is maximin over types.  Besides the direct
(primal) formula this module provides the general second-order evaluator,
the KL-penalized variational form and its closed-form minimizer, the
mean-variance approximation and the exact mean-divergence decomposition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .exceptions import DomainError, NumericError
from .model import Society, expected_utility, type_utilities
from .utility import LOG, UtilitySpec

__all__ = [
    "WelfareParams",
    "SecondOrderTransform",
    "WeightVector",
    "MeanDivergence",
    "phi_theta",
    "phi_theta_inverse",
    "identity_transform",
    "exponential_transform",
    "welfare_primal",
    "welfare_second_order",
    "optimal_weights",
    "variational_objective",
    "welfare_variational",
    "kl_divergence",
    "bregman_divergence",
    "cgf",
    "cgf_derivative",
    "welfare_mean_variance",
    "welfare_mean_divergence",
]


@dataclass(frozen=True)
class WelfareParams:
    """Aversion parameter plus numerical switches.

    Below ``theta_small_switch`` the primal value is taken from the
    second-order cumulant expansion, which avoids dividing a rounding error
    by a tiny ``theta``.
    """

    theta: float = 0.0
    theta_small_switch: float = 1e-6
    dual_tol: float = 1e-8

    def __post_init__(self):
        theta = float(self.theta)
        if math.isnan(theta) or theta < 0:
            raise DomainError(f"theta must be >= 0, got {self.theta!r}")
        if not self.theta_small_switch > 0:
            raise DomainError("theta_small_switch must be > 0")
        object.__setattr__(self, "theta", theta)

    @property
    def rho(self) -> float:
        return math.exp(-self.theta)


def as_params(theta: float | WelfareParams) -> WelfareParams:
    return theta if isinstance(theta, WelfareParams) else WelfareParams(theta)


@dataclass(frozen=True)
class WeightVector:
    """Per-type weights on the simplex, in society order."""

    labels: tuple[str, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.weights):
            raise ValueError("labels and weights differ in length")
        total = math.fsum(self.weights)
        if abs(total - 1.0) > 1e-10:
            raise NumericError(f"weights sum to {total!r}")

    @classmethod
    def from_array(cls, labels: Sequence[str], weights) -> "WeightVector":
        return cls(tuple(labels), tuple(float(w) for w in weights))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.weights)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.labels, self.weights))

    def __getitem__(self, label: str) -> float:
        return self.weights[self.labels.index(label)]


@dataclass(frozen=True)
class SecondOrderTransform:
    """A strictly increasing map with its inverse."""

    phi: Callable[[float], float]
    phi_inverse: Callable[[float], float]
    descriptor: str = ""


class MeanDivergence(NamedTuple):
    welfare: float
    efficiency: float
    iop_term: float


# ---------------------------------------------------------------------------
# type-level inputs


class _Profile(NamedTuple):
    q: np.ndarray  # normalized shares of groups with distinct utility
    U: np.ndarray  # ascending


def _profile(society: Society, u: UtilitySpec) -> _Profile:
    """Shares and utilities of supported types, pooled by equal utility.

    Welfare depends only on the distribution of ``U`` under ``q``, so types
    with identical utility are pooled and sorted.  This makes relabelling
    and type splits leave every evaluation bit-for-bit unchanged.
    """
    pools: dict[float, list[float]] = {}
    for t in society.supported:
        pools.setdefault(expected_utility(t.dist, u), []).append(t.share)
    if not pools:
        raise DomainError("society has no type with a positive share")
    levels = sorted(pools)
    q = np.array([math.fsum(pools[v]) for v in levels])
    q = q / math.fsum(q)
    return _Profile(q, np.array(levels))


def _fsum(x) -> float:
    return math.fsum(np.asarray(x, dtype=float).ravel())


def _log_mean_exp_shifted(q: np.ndarray, x: np.ndarray) -> float:
    """``log sum q exp(x)`` for ``x <= 0`` with ``max(x) == 0``, q on the simplex."""
    e = np.exp(x)
    s = _fsum(q * e)
    if s > 0.5:
        # log1p route keeps full relative accuracy when the mean is close to 1;
        # sum(q) is taken as exactly 1 so its rounding does not leak in
        return math.log1p(_fsum(q * np.expm1(x)))
    return math.log(s)


def _mean(q: np.ndarray, U: np.ndarray) -> float:
    return _fsum(q * U)


def _variance(q: np.ndarray, U: np.ndarray) -> float:
    m = _mean(q, U)
    return _fsum(q * (U - m) ** 2)


# ---------------------------------------------------------------------------
# the exponential transform


def phi_theta(t: float, theta: float) -> float:
    if theta < 0:
        raise DomainError("theta must be >= 0")
    if theta == 0:
        return t
    return -math.exp(-theta * t)


def phi_theta_inverse(t: float, theta: float) -> float:
    if theta < 0:
        raise DomainError("theta must be >= 0")
    if theta == 0:
        return t
    if t >= 0:
        raise DomainError(f"inverse exponential transform needs t < 0, got {t!r}")
    return -math.log(-t) / theta


def identity_transform() -> SecondOrderTransform:
    return SecondOrderTransform(lambda t: t, lambda t: t, "identity")


def exponential_transform(theta: float, normalized: bool = True, center: float = 0.0) -> SecondOrderTransform:
    """The exponential transform as a pluggable second-order map.

    With ``normalized=True`` the equivalent map
    ``(1 - exp(-theta (t - center))) / theta`` is returned.  It differs from
    ``-exp(-theta t)`` by a positive affine change, which leaves the certainty
    equivalent unchanged, but it is exact near ``t = center`` and tends to
    the identity as ``theta -> 0``.  Choosing ``center`` at or below the
    smallest utility keeps every exponent non-positive, so large ``theta``
    does not saturate the map.
    """
    theta = float(theta)
    center = float(center)
    if theta < 0 or not math.isfinite(theta):
        raise DomainError("theta must be finite and >= 0")
    if theta == 0:
        return identity_transform()
    if not normalized:
        return SecondOrderTransform(
            lambda t: phi_theta(t, theta),
            lambda v: phi_theta_inverse(v, theta),
            f"-exp(-{theta!r} t)",
        )

    def inv(v: float) -> float:
        arg = -theta * v
        if arg <= -1.0:
            raise DomainError(f"value {v!r} is outside the range of the transform")
        return center - math.log1p(arg) / theta

    return SecondOrderTransform(
        lambda t: -math.expm1(-theta * (t - center)) / theta,
        inv,
        f"(1 - exp(-{theta!r} (t - {center!r}))) / {theta!r}",
    )


# ---------------------------------------------------------------------------
# representations


def welfare_primal(society: Society, u: UtilitySpec = LOG, theta: float | WelfareParams = 0.0) -> float:
    """Social welfare via the log-sum-exp form, stabilized at the worst-off type."""
    params = as_params(theta)
    q, U = _profile(society, u)
    th = params.theta
    if th == 0:
        return _mean(q, U)
    if math.isinf(th):
        return float(U[0])
    if th < params.theta_small_switch:
        return welfare_mean_variance(society, u, th)
    umin = float(U[0])
    return umin - _log_mean_exp_shifted(q, -th * (U - umin)) / th


def welfare_second_order(society: Society, u: UtilitySpec, transform: SecondOrderTransform) -> float:
    """``phi^-1(sum_s q(s) phi(U_s))`` for an arbitrary increasing ``phi``."""
    supported = society.supported
    q = np.array([t.share for t in supported])
    q = q / math.fsum(q)
    values = [transform.phi(expected_utility(t.dist, u)) for t in supported]
    inner = math.fsum(float(w) * v for w, v in zip(q, values))
    try:
        return float(transform.phi_inverse(inner))
    except (DomainError, ValueError, OverflowError) as exc:
        raise NumericError(
            f"second-order transform {transform.descriptor!r} cannot be inverted at {inner!r}: {exc}"
        ) from exc


def optimal_weights(society: Society, u: UtilitySpec = LOG, theta: float = 0.0) -> WeightVector:
    """Exponentially tilted normative weights, one per type (zero for zero shares).

    ``theta = inf`` returns the limit: the shares renormalized over the
    worst-off types.
    """
    theta = as_params(theta).theta
    U = type_utilities(society, u)
    q = society.shares
    on = q > 0
    w = np.zeros_like(q)
    if theta == 0:
        w[on] = q[on] / math.fsum(q[on])
    elif math.isinf(theta):
        umin = U[on].min()
        sel = on & (U == umin)
        w[sel] = q[sel] / math.fsum(q[sel])
    else:
        umin = U[on].min()
        tilt = q[on] * np.exp(-theta * (U[on] - umin))
        w[on] = tilt / _fsum(tilt)
    return WeightVector.from_array(society.labels, w)


def variational_objective(weights, society: Society, u: UtilitySpec, theta: float) -> float:
    """``sum p U + KL(p || q) / theta`` for a weight vector in society order."""
    if not theta > 0 or math.isinf(theta):
        raise DomainError("the variational objective needs 0 < theta < inf")
    p = weights.array if isinstance(weights, WeightVector) else np.asarray(weights, dtype=float)
    U = type_utilities(society, u)
    q = society.shares
    on = p > 0
    return _fsum(p[on] * U[on]) + kl_divergence(p, q) / theta


def welfare_variational(
    society: Society,
    u: UtilitySpec = LOG,
    theta: float | WelfareParams = 1.0,
    max_iter: int = 10_000,
    tol: float = 1e-14,
) -> tuple[float, WeightVector]:
    """Minimize the KL-penalized objective by exponentiated-gradient descent.

    Iterates are kept as log-weights on the support of ``q`` and start at
    ``q``.  The penalty is ``1/theta``-smooth relative to the entropy and the
    linear term adds nothing, so the step is ``theta / 2``.  Stops once the
    KL divergence between successive iterates drops below ``tol``.

    This never evaluates the closed-form minimizer, which makes it usable as
    a check on :func:`optimal_weights` and :func:`welfare_primal`.
    """
    params = as_params(theta)
    th = params.theta
    if not th > 0 or math.isinf(th):
        raise DomainError("the variational form needs 0 < theta < inf")
    U_all = type_utilities(society, u)
    q_all = society.shares
    on = q_all > 0
    U = U_all[on] - U_all[on].min()
    log_q = np.log(q_all[on] / math.fsum(q_all[on]))
    log_p = log_q.copy()
    step = th / 2.0

    for _ in range(max_iter):
        grad = U + (log_p - log_q + 1.0) / th
        nxt = log_p - step * grad
        top = nxt.max()
        nxt = nxt - (top + math.log(_fsum(np.exp(nxt - top))))
        p_next = np.exp(nxt)
        change = max(_fsum(p_next * (nxt - log_p)), 0.0)
        log_p = nxt
        if change < tol:
            break
    else:
        raise NumericError(
            f"mirror descent did not converge in {max_iter} iterations (last KL step {change:.3e})"
        )

    p = np.exp(log_p)
    p = p / _fsum(p)
    value = _fsum(p * U_all[on]) + _fsum(p * (log_p - log_q)) / th
    w = np.zeros_like(q_all)
    w[on] = p
    return value, WeightVector.from_array(society.labels, w)


def kl_divergence(p, q) -> float:
    """``sum p log(p/q)`` with ``0 log 0 = 0``."""
    p = p.array if isinstance(p, WeightVector) else np.asarray(p, dtype=float)
    q = q.array if isinstance(q, WeightVector) else np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DomainError("weight vectors differ in length")
    on = p > 0
    if np.any(q[on] <= 0):
        raise DomainError("p is not absolutely continuous with respect to q")
    return max(_fsum(p[on] * np.log(p[on] / q[on])), 0.0)


def bregman_divergence(generator: tuple[Callable[[float], float], Callable[[float], float]], x: float, y: float) -> float:
    """``phi(x) - phi(y) - (x - y) phi'(y)`` for a convex differentiable ``phi``."""
    f, df = generator
    if x == y:
        return 0.0
    return f(x) - f(y) - (x - y) * df(y)


def cgf(society: Society, u: UtilitySpec, tau: float) -> float:
    """Cumulant generating function of type utilities under the shares."""
    if tau == 0:
        return 0.0
    q, U = _profile(society, u)
    c = float(U[-1] if tau > 0 else U[0])
    return tau * c + _log_mean_exp_shifted(q, tau * (U - c))


def cgf_derivative(society: Society, u: UtilitySpec, tau: float) -> float:
    """Mean utility under the exponentially tilted shares ``q exp(tau U)``."""
    q, U = _profile(society, u)
    if tau == 0:
        return _mean(q, U)
    c = U[-1] if tau > 0 else U[0]
    tilt = q * np.exp(tau * (U - c))
    return _fsum(tilt * U) / _fsum(tilt)


def welfare_mean_variance(society: Society, u: UtilitySpec = LOG, theta: float = 0.0) -> float:
    """Second-order approximation ``E[U] - theta/2 Var(U)``."""
    q, U = _profile(society, u)
    if theta == 0:
        return _mean(q, U)
    return _mean(q, U) - 0.5 * theta * _variance(q, U)


def welfare_mean_divergence(
    society: Society, u: UtilitySpec = LOG, theta: float | WelfareParams = 1.0
) -> MeanDivergence:
    """Efficiency minus a Bregman divergence of the CGF.

    The loss term is ``D_K(-theta || 0) / theta``, which is non-negative and
    vanishes exactly when all supported types share the same utility.
    """
    params = as_params(theta)
    th = params.theta
    if not th > 0 or math.isinf(th):
        raise DomainError("the mean-divergence form needs 0 < theta < inf")
    q, U = _profile(society, u)
    efficiency = _mean(q, U)
    if U[0] == U[-1]:
        return MeanDivergence(efficiency, efficiency, 0.0)
    if th < params.theta_small_switch:
        loss = 0.5 * th * _variance(q, U)
    else:
        gen = (lambda t: cgf(society, u, t), lambda t: cgf_derivative(society, u, t))
        loss = bregman_divergence(gen, -th, 0.0) / th
    return MeanDivergence(efficiency - loss, efficiency, loss)
