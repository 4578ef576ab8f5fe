"""Opportunity stochastic dominance between two societies.

Society A dominates B when its welfare is at least as high for every aversion
level.  The infinite range ``theta in [0, inf]`` is covered with the
reparameterization ``rho = exp(-theta)`` on a finite grid whose endpoints
(utilitarian and maximin) are evaluated exactly.

An independent check evaluates the Bernstein family
``phi_r(z) = (1 - exp(-r z)) / r`` of completely alternating functions, plus
its linear limit ``r -> 0``, directly on the type utilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .indices import theta_from_rho
from .model import Society, type_utilities
from .utility import AffineUtility, UtilitySpec
from .welfare import welfare_primal

DOMINATES = "dominates"
DOMINATED = "dominated"
EQUIVALENT = "equivalent"
CROSSING = "crossing"

DEFAULT_R_VALUES = tuple(float(r) for r in np.logspace(-3, 3, 25))


def _classify(pos: bool, neg: bool) -> str:
    if pos and neg:
        return CROSSING
    if pos:
        return DOMINATES
    if neg:
        return DOMINATED
    return EQUIVALENT


@dataclass(frozen=True)
class CAFamilyResult:
    """Outcome of the completely-alternating family comparison.

    ``r = 0`` stands for the linear member.  ``gaps`` holds the certainty
    equivalent difference ``(phi_r^-1(E_A phi_r) - phi_r^-1(E_B phi_r))``,
    which has the sign of the expected-value difference but does not
    underflow for large ``r``.
    """

    relation: str
    r_values: tuple[float, ...]
    differences: tuple[float, ...]
    gaps: tuple[float, ...]
    violations_a_over_b: tuple[float, ...]
    violations_b_over_a: tuple[float, ...]


@dataclass(frozen=True)
class DominanceVerdict:
    relation: str
    theta_grid: tuple[float, ...]  # rho points
    margins: tuple[float, ...]
    crossings: tuple[tuple[float, float], ...] = ()
    ca_family_result: CAFamilyResult | None = None
    tol: float = 1e-9
    utility_shift: float = 0.0
    thetas: tuple[float, ...] = field(default=(), repr=False)


def normalize_utility_for_dominance(u: UtilitySpec, a: Society, b: Society) -> UtilitySpec:
    """Shift ``u`` by a common constant so it is non-negative on both supports."""
    support = np.union1d(a.union_support(), b.union_support())
    lowest = float(np.min(u(support)))
    shift = max(0.0, -lowest)
    if shift == 0.0:
        return u
    return AffineUtility(u, 1.0, shift)


def _shift_of(u: UtilitySpec, normalized: UtilitySpec) -> float:
    return normalized.b if normalized is not u and isinstance(normalized, AffineUtility) else 0.0


def _margin(a: Society, b: Society, u: UtilitySpec, rho: float) -> float:
    theta = theta_from_rho(rho)
    return welfare_primal(a, u, theta) - welfare_primal(b, u, theta)


def _bracket(a, b, u, lo, hi, sign_lo, width):
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        m = _margin(a, b, u, mid)
        if (m > 0) == (sign_lo > 0) and m != 0:
            lo = mid
        else:
            hi = mid
    return (lo, hi)


def dominance_check(
    a: Society,
    b: Society,
    u: UtilitySpec,
    grid_size: int = 101,
    tol: float = 1e-9,
    ca_family: bool = False,
    r_values: Sequence[float] | None = None,
) -> DominanceVerdict:
    """Compare ``V(A) - V(B)`` over ``rho`` in {0, 1/(g-1), ..., 1}.

    Margins within ``tol`` count as ties.  Sign changes are bracketed by
    bisection to width ``1e-4`` in ``rho``.
    """
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    un = normalize_utility_for_dominance(u, a, b)
    rhos = np.linspace(0.0, 1.0, grid_size)
    margins = np.array([_margin(a, b, un, float(r)) for r in rhos])
    pos, neg = margins > tol, margins < -tol
    relation = _classify(bool(pos.any()), bool(neg.any()))

    crossings = []
    if relation == CROSSING:
        sig = [(float(r), 1.0 if m > 0 else -1.0) for r, m in zip(rhos, margins) if abs(m) > tol]
        for (r0, s0), (r1, s1) in zip(sig, sig[1:]):
            if s0 != s1:
                crossings.append(_bracket(a, b, un, r0, r1, s0, 1e-4))

    ca = dominance_ca_family(a, b, u, r_values, tol) if ca_family else None
    return DominanceVerdict(
        relation=relation,
        theta_grid=tuple(float(r) for r in rhos),
        margins=tuple(float(m) for m in margins),
        crossings=tuple(crossings),
        ca_family_result=ca,
        tol=tol,
        utility_shift=_shift_of(u, un),
        thetas=tuple(theta_from_rho(float(r)) for r in rhos),
    )


def dominance_ca_family(
    a: Society,
    b: Society,
    u: UtilitySpec,
    r_values: Sequence[float] | None = None,
    tol: float = 1e-9,
) -> CAFamilyResult:
    """Check ``E_A phi(U) >= E_B phi(U')`` for the Bernstein generators.

    The utility is first made non-negative with
    :func:`normalize_utility_for_dominance`.
    """
    rs = DEFAULT_R_VALUES if r_values is None else tuple(float(r) for r in r_values)
    if any(not (r > 0 and math.isfinite(r)) for r in rs):
        raise ValueError("r values must be positive and finite")
    un = normalize_utility_for_dominance(u, a, b)
    qa, ua = _weights_and_utilities(a, un)
    qb, ub = _weights_and_utilities(b, un)

    r_all = (0.0, *rs)
    diffs, gaps = [], []
    for r in r_all:
        if r == 0.0:
            d = math.fsum(qa * ua) - math.fsum(qb * ub)
            diffs.append(d)
            gaps.append(d)
            continue
        la = float(logsumexp(-r * ua, b=qa))
        lb = float(logsumexp(-r * ub, b=qb))
        diffs.append((math.exp(lb) - math.exp(la)) / r)
        gaps.append((lb - la) / r)

    bad_ab = tuple(r for r, g in zip(r_all, gaps) if g < -tol)
    bad_ba = tuple(r for r, g in zip(r_all, gaps) if g > tol)
    return CAFamilyResult(
        relation=_classify(bool(bad_ba), bool(bad_ab)),
        r_values=r_all,
        differences=tuple(diffs),
        gaps=tuple(gaps),
        violations_a_over_b=bad_ab,
        violations_b_over_a=bad_ba,
    )


def _weights_and_utilities(s: Society, u: UtilitySpec) -> tuple[np.ndarray, np.ndarray]:
    q = s.shares
    on = q > 0
    return q[on] / math.fsum(q[on]), type_utilities(s, u)[on]
