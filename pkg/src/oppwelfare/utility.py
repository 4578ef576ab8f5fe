"""Utility functions over incomes.

Four kinds are supported: logarithmic, power (``y ** sigma``), positive affine
transforms of another utility, and tabulated utilities given as an explicit
income -> utility map.  Each one is a small frozen dataclass that is callable
on an array of incomes and knows its own inverse, which the EDEI computations
need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .exceptions import DomainError, NumericError


class UtilitySpec:
    """Base class for utility specifications."""

    def __call__(self, incomes) -> np.ndarray:
        raise NotImplementedError

    def inverse(self, value: float) -> float:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError

    @property
    def is_scale_invariant(self) -> bool:
        """True when rankings survive rescaling of every income for all theta."""
        return False


@dataclass(frozen=True)
class LogUtility(UtilitySpec):
    def __call__(self, incomes) -> np.ndarray:
        y = np.asarray(incomes, dtype=float)
        if np.any(y <= 0):
            raise DomainError("log utility requires strictly positive incomes")
        return np.log(y)

    def inverse(self, value: float) -> float:
        out = math.exp(value) if value < 709.78 else math.inf
        if not math.isfinite(out) or out <= 0.0:
            raise NumericError(f"log utility cannot be inverted at {value!r}")
        return out

    def describe(self) -> str:
        return "log"

    @property
    def is_scale_invariant(self) -> bool:
        return True


@dataclass(frozen=True)
class PowerUtility(UtilitySpec):
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise DomainError(f"power utility needs sigma > 0, got {self.sigma!r}")

    def __call__(self, incomes) -> np.ndarray:
        y = np.asarray(incomes, dtype=float)
        if np.any(y <= 0):
            raise DomainError("power utility requires strictly positive incomes")
        if self.sigma == 1.0:
            return y.copy()
        with np.errstate(over="ignore"):
            out = y ** self.sigma
        if not np.all(np.isfinite(out)):
            raise NumericError(f"power utility (sigma={self.sigma!r}) overflows on these incomes")
        return out

    def inverse(self, value: float) -> float:
        if not value > 0:
            raise NumericError(
                f"power utility (sigma={self.sigma!r}) cannot be inverted at {value!r}"
            )
        if self.sigma == 1.0:
            return float(value)
        return float(value ** (1.0 / self.sigma))

    def describe(self) -> str:
        return f"power:{self.sigma!r}"


@dataclass(frozen=True)
class AffineUtility(UtilitySpec):
    """``a * base(y) + b`` with ``a > 0``."""

    base: UtilitySpec
    a: float = 1.0
    b: float = 0.0

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise DomainError(f"affine utility needs a > 0, got {self.a!r}")
        if not math.isfinite(self.b):
            raise DomainError(f"affine utility needs a finite shift, got {self.b!r}")

    def __call__(self, incomes) -> np.ndarray:
        return self.a * self.base(incomes) + self.b

    def inverse(self, value: float) -> float:
        return self.base.inverse((value - self.b) / self.a)

    def describe(self) -> str:
        return f"affine({self.base.describe()},a={self.a!r},b={self.b!r})"

    @property
    def is_scale_invariant(self) -> bool:
        # a log base keeps the additive shift structure only when a == 1
        return self.a == 1.0 and self.base.is_scale_invariant


@dataclass(frozen=True)
class TabulatedUtility(UtilitySpec):
    """Utility given on a finite set of incomes.

    The table must be strictly increasing in income.  Evaluation at an income
    that is not in the table raises :class:`DomainError`; the inverse uses
    piecewise-linear interpolation and refuses to extrapolate.
    """

    incomes: tuple[float, ...]
    utilities: tuple[float, ...]
    _lookup: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        ys = tuple(float(y) for y in self.incomes)
        us = tuple(float(v) for v in self.utilities)
        if len(ys) != len(us) or not ys:
            raise DomainError("tabulated utility needs matching, non-empty columns")
        order = sorted(range(len(ys)), key=ys.__getitem__)
        ys = tuple(ys[i] for i in order)
        us = tuple(us[i] for i in order)
        if any(y <= 0 or not math.isfinite(y) for y in ys):
            raise DomainError("tabulated incomes must be positive and finite")
        if any(b <= a for a, b in zip(ys, ys[1:])):
            raise DomainError("tabulated incomes must be distinct")
        if any(not math.isfinite(v) for v in us):
            raise DomainError("tabulated utilities must be finite")
        if any(b <= a for a, b in zip(us, us[1:])):
            raise DomainError("tabulated utility must be strictly increasing in income")
        object.__setattr__(self, "incomes", ys)
        object.__setattr__(self, "utilities", us)
        object.__setattr__(self, "_lookup", dict(zip(ys, us)))

    @classmethod
    def from_mapping(cls, table: Mapping[float, float]) -> "TabulatedUtility":
        items = sorted((float(k), float(v)) for k, v in table.items())
        return cls(tuple(k for k, _ in items), tuple(v for _, v in items))

    def __call__(self, incomes) -> np.ndarray:
        y = np.asarray(incomes, dtype=float)
        flat = y.ravel()
        out = np.empty_like(flat)
        for i, value in enumerate(flat):
            try:
                out[i] = self._lookup[float(value)]
            except KeyError:
                raise DomainError(f"tabulated utility has no entry for income {value!r}") from None
        return out.reshape(y.shape)

    def inverse(self, value: float) -> float:
        lo, hi = self.utilities[0], self.utilities[-1]
        if not lo <= value <= hi:
            raise NumericError(
                f"utility level {value!r} is outside the tabulated range [{lo!r}, {hi!r}]"
            )
        return float(np.interp(value, self.utilities, self.incomes))

    def describe(self) -> str:
        return f"tabulated({len(self.incomes)} points)"


LOG = LogUtility()


def parse_utility(text: str) -> UtilitySpec:
    """Parse ``"log"`` or ``"power:<sigma>"``."""
    text = text.strip().lower()
    if text in ("log", "ln"):
        return LOG
    if text.startswith("power:"):
        try:
            sigma = float(text.split(":", 1)[1])
        except ValueError:
            raise DomainError(f"cannot parse power exponent in {text!r}") from None
        return PowerUtility(sigma)
    raise DomainError(f"unknown utility {text!r}; expected 'log' or 'power:<sigma>'")
