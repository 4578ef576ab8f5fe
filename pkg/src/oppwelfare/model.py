"""Income distributions, types and societies.

All objects are immutable.  Distributions are canonicalized on construction:
support sorted, duplicate incomes merged, probabilities renormalized when
their sum is off by less than ``1e-9``.  Zero-probability atoms are kept so
that supports stay stable across transformations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exceptions import DomainError, ValidationError
from .utility import UtilitySpec

PROB_TOL = 1e-12
RENORM_TOL = 1e-9
SHARE_TOL = 1e-12


@dataclass(frozen=True)
class IncomeDistribution:
    """Discrete distribution on strictly positive incomes."""

    incomes: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        ys = [float(y) for y in self.incomes]
        ps = [float(p) for p in self.probs]
        if len(ys) != len(ps):
            raise ValidationError("incomes and probabilities differ in length")
        if not ys:
            raise ValidationError("a distribution needs at least one atom")
        for y in ys:
            if not (math.isfinite(y) and y > 0):
                raise ValidationError(f"incomes must lie in (0, inf), got {y!r}")
        for p in ps:
            if not (math.isfinite(p) and p >= 0):
                raise ValidationError(f"probabilities must be >= 0, got {p!r}")

        merged: dict[float, list[float]] = {}
        for y, p in zip(ys, ps):
            merged.setdefault(y, []).append(p)
        support = sorted(merged)
        masses = [merged[y][0] if len(merged[y]) == 1 else math.fsum(merged[y]) for y in support]

        total = math.fsum(masses)
        gap = abs(total - 1.0)
        if gap > RENORM_TOL:
            raise ValidationError(f"probabilities sum to {total!r}, not 1")
        if gap > PROB_TOL:
            masses = [p / total for p in masses]
        object.__setattr__(self, "incomes", tuple(support))
        object.__setattr__(self, "probs", tuple(masses))

    @classmethod
    def from_mapping(cls, table: Mapping[float, float]) -> "IncomeDistribution":
        return cls(tuple(table.keys()), tuple(table.values()))

    @classmethod
    def degenerate(cls, income: float) -> "IncomeDistribution":
        return cls((income,), (1.0,))

    @property
    def support(self) -> np.ndarray:
        return np.asarray(self.incomes)

    @property
    def weights(self) -> np.ndarray:
        return np.asarray(self.probs)

    def prob(self, income: float) -> float:
        try:
            return self.probs[self.incomes.index(float(income))]
        except ValueError:
            return 0.0

    def on_support(self, support: Sequence[float]) -> np.ndarray:
        """Probability vector on ``support`` (which must contain our atoms)."""
        lookup = dict(zip(self.incomes, self.probs))
        out = np.array([lookup.pop(float(y), 0.0) for y in support])
        if any(p > 0 for p in lookup.values()):
            raise DomainError("support does not cover the distribution")
        return out

    def __len__(self) -> int:
        return len(self.incomes)


@dataclass(frozen=True)
class TypeEntry:
    label: str
    share: float
    dist: IncomeDistribution

    def __post_init__(self):
        share = float(self.share)
        if not (math.isfinite(share) and share >= 0):
            raise ValidationError(f"share must be >= 0, got {share!r}", (str(self.label),))
        object.__setattr__(self, "share", share)
        object.__setattr__(self, "label", str(self.label))


@dataclass(frozen=True)
class Society:
    """A list of types, each with a population share and an income distribution."""

    types: tuple[TypeEntry, ...]
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        types = tuple(self.types)
        object.__setattr__(self, "types", types)
        if not types:
            raise ValidationError("a society needs at least one type")
        labels = [t.label for t in types]
        dupes = sorted({lab for lab in labels if labels.count(lab) > 1})
        if dupes:
            raise ValidationError("type labels must be unique", tuple(dupes))
        total = math.fsum(t.share for t in types)
        if abs(total - 1.0) > SHARE_TOL:
            raise ValidationError(f"type shares sum to {total!r}, not 1", tuple(labels))
        if not any(t.share > 0 for t in types):
            raise ValidationError("at least one type needs a positive share")

    @classmethod
    def from_rows(
        cls,
        shares: Sequence[float],
        rows: Sequence[Mapping[float, float]],
        labels: Sequence[str] | None = None,
        name: str | None = None,
    ) -> "Society":
        """Build a society from per-type ``{income: prob}`` rows."""
        if labels is None:
            labels = [f"s{i}" for i in range(len(rows))]
        if not (len(shares) == len(rows) == len(labels)):
            raise ValidationError("shares, rows and labels differ in length")
        return cls(
            tuple(
                TypeEntry(lab, q, IncomeDistribution.from_mapping(row))
                for lab, q, row in zip(labels, shares, rows)
            ),
            name=name,
        )

    @classmethod
    def equal_opportunity(
        cls, dist: IncomeDistribution, shares: Sequence[float], labels: Sequence[str] | None = None
    ) -> "Society":
        if labels is None:
            labels = [f"s{i}" for i in range(len(shares))]
        return cls(tuple(TypeEntry(lab, q, dist) for lab, q in zip(labels, shares)))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(t.label for t in self.types)

    @property
    def shares(self) -> np.ndarray:
        return np.array([t.share for t in self.types])

    @property
    def supported(self) -> tuple[TypeEntry, ...]:
        """Types with a positive share; zero-share types never enter evaluations."""
        return tuple(t for t in self.types if t.share > 0)

    def __getitem__(self, label: str) -> TypeEntry:
        for t in self.types:
            if t.label == label:
                return t
        raise KeyError(label)

    def __len__(self) -> int:
        return len(self.types)

    def union_support(self) -> np.ndarray:
        return np.array(sorted({y for t in self.types for y in t.dist.incomes}))


# ---------------------------------------------------------------------------
# elementary statistics


def mean(dist: IncomeDistribution) -> float:
    return math.fsum(p * y for y, p in zip(dist.incomes, dist.probs) if p > 0)


def geometric_mean(dist: IncomeDistribution) -> float:
    return math.exp(math.fsum(p * math.log(y) for y, p in zip(dist.incomes, dist.probs) if p > 0))


def expected_utility(dist: IncomeDistribution, u: UtilitySpec) -> float:
    ys = [y for y, p in zip(dist.incomes, dist.probs) if p > 0]
    ps = [p for p in dist.probs if p > 0]
    values = u(np.asarray(ys))
    return math.fsum(p * float(v) for p, v in zip(ps, values))


def aggregate(society: Society) -> IncomeDistribution:
    """Population-wide income distribution ``sum_s q(s) pi_s``."""
    parts: dict[float, list[float]] = {}
    for t in society.types:
        for y, p in zip(t.dist.incomes, t.dist.probs):
            parts.setdefault(y, []).append(t.share * p)
    support = sorted(parts)
    return IncomeDistribution(tuple(support), tuple(math.fsum(parts[y]) for y in support))


def type_utilities(society: Society, u: UtilitySpec) -> np.ndarray:
    """Expected utility of every type, in society order."""
    return np.array([expected_utility(t.dist, u) for t in society.types])


# ---------------------------------------------------------------------------
# society transformations


def _mixture(parts: Iterable[tuple[float, IncomeDistribution]]) -> IncomeDistribution:
    acc: dict[float, list[float]] = {}
    for w, dist in parts:
        for y, p in zip(dist.incomes, dist.probs):
            acc.setdefault(y, []).append(w * p)
    support = sorted(acc)
    return IncomeDistribution(tuple(support), tuple(math.fsum(acc[y]) for y in support))


def transform_scale(society: Society, factor: float) -> Society:
    """Multiply every income by ``factor``; shares and probabilities unchanged."""
    factor = float(factor)
    if not (math.isfinite(factor) and factor > 0):
        raise ValueError(f"scale factor must be > 0, got {factor!r}")
    return Society(
        tuple(
            TypeEntry(t.label, t.share, IncomeDistribution(tuple(y * factor for y in t.dist.incomes), t.dist.probs))
            for t in society.types
        ),
        name=society.name,
    )


def transform_permute(society: Society, permutation: Sequence[int]) -> Society:
    """Reassign distributions across positions.

    Position ``i`` receives the distribution previously held at position
    ``permutation[i]``; labels and shares stay where they are.
    """
    n = len(society)
    perm = [int(i) for i in permutation]
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{list(permutation)!r} is not a permutation of range({n})")
    return Society(
        tuple(TypeEntry(t.label, t.share, society.types[j].dist) for t, j in zip(society.types, perm)),
        name=society.name,
    )


def transform_converge(society: Society, s: str, s_prime: str, alpha: float) -> Society:
    """Pull the distributions of two types towards their midpoint.

    Both rows become ``alpha * own + (1 - alpha) * midpoint``.
    """
    if s == s_prime:
        raise ValueError("converging a type with itself")
    alpha = float(alpha)
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha!r}")
    try:
        a, b = society[s], society[s_prime]
    except KeyError as exc:
        raise ValueError(f"unknown type label {exc.args[0]!r}") from None
    mid = _mixture(((0.5, a.dist), (0.5, b.dist)))
    if alpha == 0.0:
        new_a = new_b = mid
    else:
        new_a = _mixture(((alpha, a.dist), (1 - alpha, mid)))
        new_b = _mixture(((alpha, b.dist), (1 - alpha, mid)))
    replaced = {s: new_a, s_prime: new_b}
    return Society(
        tuple(TypeEntry(t.label, t.share, replaced.get(t.label, t.dist)) for t in society.types),
        name=society.name,
    )


def split_type(
    society: Society,
    label: str,
    fractions: tuple[float, float],
    labels: tuple[str, str] | None = None,
) -> Society:
    """Replace one type by two types with the same distribution.

    ``fractions`` are the two new shares and must add up to the old share.
    """
    try:
        old = society[label]
    except KeyError:
        raise ValueError(f"unknown type label {label!r}") from None
    w_a, w_b = (float(w) for w in fractions)
    if w_a < 0 or w_b < 0:
        raise ValueError("split shares must be >= 0")
    if abs(math.fsum((w_a, w_b)) - old.share) > SHARE_TOL:
        raise ValueError(f"split shares {w_a!r} + {w_b!r} do not add up to {old.share!r}")
    la, lb = labels if labels is not None else (f"{label}_a", f"{label}_b")
    out: list[TypeEntry] = []
    for t in society.types:
        if t.label == label:
            out += [TypeEntry(la, w_a, t.dist), TypeEntry(lb, w_b, t.dist)]
        else:
            out.append(t)
    return Society(tuple(out), name=society.name)


def _same_distribution(a: IncomeDistribution, b: IncomeDistribution, tol: float) -> bool:
    if tol == 0.0:
        nz_a = [(y, p) for y, p in zip(a.incomes, a.probs) if p > 0]
        nz_b = [(y, p) for y, p in zip(b.incomes, b.probs) if p > 0]
        return nz_a == nz_b
    support = sorted(set(a.incomes) | set(b.incomes))
    return bool(np.max(np.abs(a.on_support(support) - b.on_support(support))) <= tol)


def merge_identical(
    society: Society, labels: Sequence[str] | None = None, tol: float = 0.0
) -> Society:
    """Merge types whose distributions agree within ``tol``.

    With ``labels`` given, exactly those types are merged and must all agree;
    otherwise every group of agreeing types is merged.  The merged type keeps
    the first member's label and distribution and the summed share.
    """
    types = list(society.types)
    if labels is not None:
        missing = [lab for lab in labels if lab not in society.labels]
        if missing:
            raise ValueError(f"unknown type labels {missing!r}")
        members = [t for t in types if t.label in set(labels)]
        head = members[0]
        bad = [t.label for t in members[1:] if not _same_distribution(head.dist, t.dist, tol)]
        if bad:
            raise ValueError(f"types {bad!r} differ from {head.label!r} by more than tol={tol!r}")
        groups = [members]
    else:
        groups = []
        for t in types:
            for g in groups:
                if _same_distribution(g[0].dist, t.dist, tol):
                    g.append(t)
                    break
            else:
                groups.append([t])
    merged_of = {}
    for g in groups:
        for t in g:
            merged_of[t.label] = g
    out: list[TypeEntry] = []
    seen: set[str] = set()
    for t in types:
        g = merged_of.get(t.label)
        if g is None:
            out.append(t)
        elif g[0].label not in seen:
            seen.add(g[0].label)
            share = g[0].share if len(g) == 1 else math.fsum(m.share for m in g)
            out.append(TypeEntry(g[0].label, share, g[0].dist))
    return Society(tuple(out), name=society.name)
