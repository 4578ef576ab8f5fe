"""Random generators and brute-force oracles for testing.

The oracles here share nothing with the welfare module except the core
data model: they evaluate the defining formulas directly in extended
precision (mpmath) or by exhaustive search.

Golden fixtures are regenerated with::

    python3 -m oppwelfare.testkit golden tests/fixtures/golden_oracle.json
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np
from scipy.special import xlogy

from .model import (
    IncomeDistribution,
    Society,
    TypeEntry,
    aggregate,
    transform_converge,
    transform_permute,
    transform_scale,
)
from .utility import LOG, TabulatedUtility, UtilitySpec

ORACLE_DPS = 40


# ---------------------------------------------------------------------------
# generators


@dataclass(frozen=True)
class SocietyGenerator:
    """Seeded random societies.

    Shares are integers in 1..10, normalized, so every type keeps at least
    1/80 of the population.  Incomes are log-uniform on ``income_range``.
    """

    seed: int = 0
    max_types: int = 8
    max_support: int = 16
    income_range: tuple[float, float] = (0.1, 100.0)
    min_types: int = 1
    distinct_utilities: bool = False
    min_gap: float = 1e-3
    uniform_shares: bool = False

    def __post_init__(self):
        if not 1 <= self.min_types <= self.max_types <= 8:
            raise ValueError("need 1 <= min_types <= max_types <= 8")
        if not 1 <= self.max_support <= 16:
            raise ValueError("max_support must lie in 1..16")
        lo, hi = self.income_range
        if not 0 < lo < hi:
            raise ValueError("income_range must satisfy 0 < lo < hi")

    def _distribution(self, rng: np.random.Generator) -> IncomeDistribution:
        lo, hi = self.income_range
        k = int(rng.integers(1, self.max_support + 1))
        incomes = np.exp(rng.uniform(math.log(lo), math.log(hi), size=k))
        probs = rng.dirichlet(np.ones(k))
        return IncomeDistribution(tuple(float(y) for y in incomes), tuple(float(p) for p in probs))

    def society(self) -> Society:
        rng = np.random.default_rng(self.seed)
        n = int(rng.integers(self.min_types, self.max_types + 1))
        if self.uniform_shares:
            shares = np.full(n, 1.0 / n)
        else:
            raw = rng.integers(1, 11, size=n).astype(float)
            shares = raw / raw.sum()
        dists: list[IncomeDistribution] = []
        utils: list[float] = []
        for _ in range(n):
            for _attempt in range(1000):
                d = self._distribution(rng)
                val = _eu(d, LOG)
                if not self.distinct_utilities or all(abs(val - w) >= self.min_gap for w in utils):
                    break
            else:  # pragma: no cover - astronomically unlikely
                raise RuntimeError("could not draw distinct type utilities")
            dists.append(d)
            utils.append(val)
        return Society(
            tuple(TypeEntry(f"t{i}", float(s), d) for i, (s, d) in enumerate(zip(shares, dists))),
            name=f"random-{self.seed}",
        )


def generate(seed: int, profile: SocietyGenerator | None = None) -> Society:
    """Society drawn with the settings of ``profile`` and the given seed."""
    profile = profile or SocietyGenerator()
    return dataclasses.replace(profile, seed=int(seed)).society()


def generate_many(n: int, profile: SocietyGenerator | None = None, start: int = 0) -> list[Society]:
    return [generate(start + i, profile) for i in range(n)]


DOMINATES_OR_EQUIVALENT = "dominates-or-equivalent"


def relation_matches(expected: str, relation: str) -> bool:
    if expected == DOMINATES_OR_EQUIVALENT:
        return relation in ("dominates", "equivalent")
    return relation == expected


def generate_pair_with_known_relation(seed: int) -> tuple[Society, Society, str]:
    """A pair ``(A, B)`` whose relation under log utility holds by construction.

    ``seed % 3`` picks the construction:

    0. ``B`` is ``A`` with every income scaled by ``lam > 1``: A is dominated.
    1. ``A`` merges two equal-share types of ``B`` into their mixture:
       A dominates or is equivalent to B.
    2. Uniform shares, ``B`` is a permutation of ``A``: equivalent.
    """
    rng = np.random.default_rng([seed, 7])
    kind = seed % 3
    if kind == 0:
        a = generate(seed, SocietyGenerator(max_types=6, max_support=8))
        lam = float(rng.uniform(1.5, 4.0))
        return a, transform_scale(a, lam), "dominated"
    if kind == 1:
        base = generate(seed, SocietyGenerator(min_types=2, max_types=6, max_support=8))
        i, j = rng.choice(len(base.types), size=2, replace=False)
        shares = [t.share for t in base.types]
        shares[j] = shares[i]
        total = math.fsum(shares)
        b = Society(
            tuple(TypeEntry(t.label, s / total, t.dist) for t, s in zip(base.types, shares)),
            name=base.name,
        )
        a = transform_converge(b, b.types[i].label, b.types[j].label, 0.0)
        return a, b, DOMINATES_OR_EQUIVALENT
    a = generate(seed, SocietyGenerator(min_types=2, max_types=6, max_support=8, uniform_shares=True))
    perm = [int(x) for x in rng.permutation(len(a.types))]
    return a, transform_permute(a, perm), "equivalent"


# ---------------------------------------------------------------------------
# extended-precision reference evaluator


def _eu(dist: IncomeDistribution, u: UtilitySpec) -> float:
    return math.fsum(p * float(u(y)) for y, p in zip(dist.incomes, dist.probs) if p > 0)


def _type_table(society: Society, u: UtilitySpec) -> tuple[list, list]:
    """Normalized shares and expected utilities of supported types, as mpf."""
    q = [mpmath.mpf(t.share) for t in society.types if t.share > 0]
    total = mpmath.fsum(q)
    U = [
        mpmath.fsum(mpmath.mpf(p) * mpmath.mpf(float(u(y))) for y, p in zip(t.dist.incomes, t.dist.probs))
        for t in society.types
        if t.share > 0
    ]
    return [x / total for x in q], U


def _value_mp(q, U, theta):
    if theta == 0:
        return mpmath.fsum(a * b for a, b in zip(q, U))
    if theta == math.inf:
        return min(U)
    th = mpmath.mpf(theta)
    return -mpmath.log(mpmath.fsum(a * mpmath.exp(-th * b) for a, b in zip(q, U))) / th


def oracle_welfare(society: Society, u: UtilitySpec, theta: float) -> float:
    """Welfare from the defining formula at 40 significant digits."""
    with mpmath.workdps(ORACLE_DPS):
        q, U = _type_table(society, u)
        return float(_value_mp(q, U, theta))


def oracle_weights(society: Society, u: UtilitySpec, theta: float) -> list[float]:
    """Exponentially tilted weights of supported types, in society order."""
    with mpmath.workdps(ORACLE_DPS):
        q, U = _type_table(society, u)
        if theta == math.inf:
            m = min(U)
            raw = [a if b == m else mpmath.mpf(0) for a, b in zip(q, U)]
        else:
            raw = [a * mpmath.exp(-mpmath.mpf(theta) * b) for a, b in zip(q, U)]
        total = mpmath.fsum(raw)
        return [float(r / total) for r in raw]


def oracle_cgf(society: Society, u: UtilitySpec, tau: float) -> float:
    with mpmath.workdps(ORACLE_DPS):
        q, U = _type_table(society, u)
        return float(mpmath.log(mpmath.fsum(a * mpmath.exp(mpmath.mpf(tau) * b) for a, b in zip(q, U))))


def oracle_edei(society: Society, u: UtilitySpec, theta: float, lo: float = 1e-12, hi: float = 1e12) -> float:
    """Income whose utility equals the oracle welfare, found by bisection."""
    target = oracle_welfare(society, u, theta)
    if not float(u(lo)) <= target <= float(u(hi)):
        raise ValueError("welfare outside the bisection bracket")
    for _ in range(400):
        mid = math.sqrt(lo * hi)
        if float(u(mid)) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * math.ulp(hi):
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# brute-force variational oracle


@dataclass(frozen=True)
class GridOracleResult:
    value: float
    weights: tuple[float, ...]
    modulus: float
    grid_per_dim: int


def _binary_entropy(t: float) -> float:
    if t <= 0 or t >= 1:
        return 0.0
    return -t * math.log(t) - (1 - t) * math.log(1 - t)


def oracle_variational_grid(
    society: Society, u: UtilitySpec, theta: float, grid_per_dim: int = 1000
) -> GridOracleResult:
    """Minimize ``sum p U + KL(p || q) / theta`` over the grid ``p in (1/N) Z^k``.

    Works for up to three supported types.  ``modulus`` bounds how far the
    grid minimum can sit above the true minimum: the nearest grid point to the
    minimizer is within total variation ``T = (k - 1) / (2N)``, and the
    objective changes by at most
    ``T range(U) + (T range(ln q) + T ln(k - 1) + h(T)) / theta``
    (Fannes-Audenaert bound on the entropy part).
    """
    if grid_per_dim < 1000:
        raise ValueError("grid_per_dim must be >= 1000")
    if not (theta > 0 and math.isfinite(theta)):
        raise ValueError("theta must be positive and finite")
    q = np.array([t.share for t in society.types if t.share > 0], dtype=float)
    q = q / math.fsum(q)
    U = np.array([_eu(t.dist, u) for t in society.types if t.share > 0])
    k = len(q)
    if k > 3:
        raise ValueError("grid oracle handles at most 3 supported types; use welfare_variational instead")
    N = int(grid_per_dim)
    logq = np.log(q)

    def objective(P: np.ndarray) -> np.ndarray:
        return P @ U + (xlogy(P, P) - P * logq).sum(axis=1) / theta

    if k == 1:
        best_val, best_p = float(U[0]), np.array([1.0])
    elif k == 2:
        a = np.arange(N + 1) / N
        P = np.column_stack([a, 1 - a])
        vals = objective(P)
        i = int(np.argmin(vals))
        best_val, best_p = float(vals[i]), P[i]
    else:
        best_val, best_p = math.inf, None
        for i in range(N + 1):
            j = np.arange(N - i + 1)
            P = np.column_stack([np.full(j.size, i), j, N - i - j]) / N
            vals = objective(P)
            m = int(np.argmin(vals))
            if vals[m] < best_val:
                best_val, best_p = float(vals[m]), P[m]

    T = (k - 1) / (2 * N)
    span_u = float(U.max() - U.min())
    span_q = float(logq.max() - logq.min())
    entropy = T * math.log(k - 1) + _binary_entropy(T) if k > 1 else 0.0
    modulus = T * span_u + (T * span_q + entropy) / theta if k > 1 else 0.0
    return GridOracleResult(best_val, tuple(float(x) for x in best_p), modulus, N)


# ---------------------------------------------------------------------------
# finite differences


def oracle_finite_difference(
    target: str,
    society: Society,
    u: UtilitySpec,
    theta: float,
    h: float = 1e-5,
    at: str | float | None = None,
) -> float:
    """Central difference of welfare or of the cumulant generating function.

    ``target`` is one of

    ``"dV/dU"``
        derivative in the expected utility of type ``at`` (a label);
        compare with the normative weight of that type.
    ``"dV/du"``
        derivative in the utility level of income ``at``;
        compare with ``sum_s p(s) pi_s(at)``.
    ``"dK/dtau"``
        derivative of the CGF at ``tau = at`` (default 0), here ``theta`` is
        ignored; compare with the tilted mean of U (``E_q[U]`` at 0).
    """
    if not 1e-7 <= h <= 1e-3:
        raise ValueError("h must lie in [1e-7, 1e-3]")
    with mpmath.workdps(ORACLE_DPS):
        q, U = _type_table(society, u)
        hh = mpmath.mpf(h)
        if target == "dV/dU":
            labels = [t.label for t in society.types if t.share > 0]
            s = labels.index(at)

            def f(eps):
                V = list(U)
                V[s] += eps
                return _value_mp(q, V, theta)

        elif target == "dV/du":
            y = float(at)
            pis = [mpmath.mpf(t.dist.prob(y)) for t in society.types if t.share > 0]

            def f(eps):
                return _value_mp(q, [b + eps * p for b, p in zip(U, pis)], theta)

        elif target == "dK/dtau":
            tau = mpmath.mpf(0 if at is None else at)

            def f(eps):
                return mpmath.log(mpmath.fsum(a * mpmath.exp((tau + eps) * b) for a, b in zip(q, U)))

        else:
            raise ValueError(f"unknown target {target!r}")
        return float((f(hh) - f(-hh)) / (2 * hh))


def perturbed_utility(society: Society, u: UtilitySpec, income: float, eps: float) -> TabulatedUtility:
    """Tabulated copy of ``u`` on the union support with ``u(income)`` moved by ``eps``."""
    ys = [float(y) for y in society.union_support()]
    vals = [float(u(y)) + (eps if y == income else 0.0) for y in ys]
    return TabulatedUtility(tuple(ys), tuple(vals))


# ---------------------------------------------------------------------------
# golden fixtures


GOLDEN_THETAS = (0.0, 1e-4, 1e-2, 0.1, 1.0, 5.0, 50.0, math.inf)


def _num(x: float):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def golden_fixture(seeds: Sequence[int] = tuple(range(20))) -> dict:
    """Oracle outputs on seeded societies, for freezing into test fixtures."""
    from .persist import society_to_document

    cases = []
    for seed in seeds:
        s = generate(seed, SocietyGenerator(max_types=5, max_support=6))
        cases.append(
            {
                "seed": seed,
                "society": society_to_document(s),
                "aggregate_mean": math.fsum(
                    y * p for y, p in zip(aggregate(s).incomes, aggregate(s).probs)
                ),
                "values": [
                    {
                        "theta": _num(th),
                        "welfare": oracle_welfare(s, LOG, th),
                        "edei": oracle_edei(s, LOG, th),
                        "weights": oracle_weights(s, LOG, th),
                    }
                    for th in GOLDEN_THETAS
                ],
            }
        )
    return {
        "generator": "SocietyGenerator(max_types=5, max_support=6)",
        "utility": "log",
        "command": "python3 -m oppwelfare.testkit golden tests/fixtures/golden_oracle.json",
        "oracle_digits": ORACLE_DPS,
        "cases": cases,
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="python3 -m oppwelfare.testkit")
    sub = parser.add_subparsers(dest="command", required=True)
    g = sub.add_parser("golden", help="write oracle golden values")
    g.add_argument("output")
    g.add_argument("--seeds", type=int, default=20)
    args = parser.parse_args(argv)
    doc = golden_fixture(tuple(range(args.seeds)))
    with open(args.output, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
