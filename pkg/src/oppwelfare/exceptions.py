"""Exception hierarchy.

Input problems derive from ``ValueError`` so callers can catch them the usual
way; numerical failures derive from ``ArithmeticError``.  The command line maps
the first family to exit code 1 and the second to exit code 2.
"""

from __future__ import annotations


class ValidationError(ValueError):
    """A value violates a domain invariant (shares, probabilities, incomes)."""

    def __init__(self, message: str, labels: tuple[str, ...] = ()):
        if labels:
            message = f"{message} (types: {', '.join(labels)})"
        super().__init__(message)
        self.labels = tuple(labels)


class SchemaError(ValidationError):
    """A society document does not match the expected schema."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


class DomainError(ValueError):
    """An argument lies outside the domain of a function."""


class NumericError(ArithmeticError):
    """A numerical procedure failed (non-convergence, inversion out of range)."""
