"""Equally-distributed equivalent incomes and the three inequality indices.

Overall inequality ``I`` splits multiplicatively into social risks ``I_R``
(Atkinson inequality of the pooled distribution, independent of theta) and
inequality of opportunity ``I_O``::

    1 - I = (1 - I_R) * (1 - I_O)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import NumericError
from .model import IncomeDistribution, Society, aggregate, expected_utility, mean, type_utilities
from .utility import LOG, UtilitySpec
from .welfare import (
    WeightVector,
    as_params,
    optimal_weights,
    welfare_mean_divergence,
    welfare_primal,
)

DECOMPOSITION_TOL = 1e-12


def _rho(theta: float) -> float:
    return 0.0 if math.isinf(theta) else math.exp(-theta)


def theta_from_rho(rho: float) -> float:
    """Inverse of ``rho = exp(-theta)``; ``rho = 0`` maps to ``inf``."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho!r}")
    if rho == 0.0:
        return math.inf
    if rho == 1.0:
        return 0.0
    return -math.log(rho)


def edei(society: Society, u: UtilitySpec = LOG, theta=0.0) -> float:
    """Income that, given to everyone, yields the society's welfare."""
    return u.inverse(welfare_primal(society, u, theta))


def atkinson_edei(dist: IncomeDistribution, u: UtilitySpec = LOG) -> float:
    """EDEI of a single income distribution (no type structure)."""
    return u.inverse(expected_utility(dist, u))


@dataclass(frozen=True)
class InequalityReport:
    edei: float
    atkinson_edei: float
    mean_income: float
    overall: float
    social_risks: float
    opportunity: float
    theta: float
    rho: float


def inequality_report(society: Society, u: UtilitySpec = LOG, theta=0.0) -> InequalityReport:
    """Overall, social-risk and opportunity indices at one aversion level.

    At ``theta = 0`` the society and its equal-opportunity counterfactual
    have the same EDEI, so the Atkinson EDEI is reused and ``I_O`` is
    exactly zero.
    """
    params = as_params(theta)
    pooled = aggregate(society)
    mu = mean(pooled)
    xi_pooled = atkinson_edei(pooled, u)
    xi = xi_pooled if params.theta == 0 else edei(society, u, params)
    overall = 1.0 - xi / mu
    social = 1.0 - xi_pooled / mu
    opportunity = 1.0 - xi / xi_pooled
    gap = abs((1.0 - overall) - (1.0 - social) * (1.0 - opportunity))
    if gap > DECOMPOSITION_TOL:
        raise NumericError(f"index decomposition off by {gap:.3e}")
    return InequalityReport(xi, xi_pooled, mu, overall, social, opportunity, params.theta, _rho(params.theta))


@dataclass(frozen=True)
class EvaluationReport:
    utility: str
    theta: float
    rho: float
    welfare: float
    edei: float
    efficiency: float
    iop_term: float
    weights: WeightVector
    type_utilities: dict[str, float]


def evaluate(society: Society, u: UtilitySpec = LOG, theta=0.0) -> EvaluationReport:
    """Welfare, EDEI, normative weights and the efficiency / opportunity split."""
    params = as_params(theta)
    th = params.theta
    welfare = welfare_primal(society, u, params)
    U = type_utilities(society, u)
    if th == 0:
        efficiency, loss = welfare, 0.0
    elif math.isinf(th):
        on = society.shares > 0
        efficiency = welfare_primal(society, u, 0.0)
        loss = efficiency - float(U[on].min())
    else:
        _, efficiency, loss = welfare_mean_divergence(society, u, params)
    return EvaluationReport(
        utility=u.describe(),
        theta=th,
        rho=_rho(th),
        welfare=welfare,
        edei=u.inverse(welfare),
        efficiency=efficiency,
        iop_term=loss,
        weights=optimal_weights(society, u, th),
        type_utilities=dict(zip(society.labels, (float(v) for v in U))),
    )


@dataclass(frozen=True)
class SweepRow:
    theta: float
    rho: float
    welfare: float
    edei: float
    I: float  # noqa: E741
    I_R: float
    I_O: float


def sweep(society: Society, u: UtilitySpec = LOG, grid: int = 101) -> list[SweepRow]:
    """Evaluate every index on ``grid`` evenly spaced points ``rho`` in [0, 1]."""
    if grid < 2:
        raise ValueError("a sweep needs at least two grid points")
    rows = []
    for rho in np.linspace(0.0, 1.0, grid):
        theta = theta_from_rho(float(rho))
        rep = inequality_report(society, u, theta)
        rows.append(
            SweepRow(
                theta=theta,
                rho=float(rho),
                welfare=welfare_primal(society, u, theta),
                edei=rep.edei,
                I=rep.overall,
                I_R=rep.social_risks,
                I_O=rep.opportunity,
            )
        )
    return rows
