"""Input checks shared by the estimator wrapper."""

from __future__ import annotations

import math
import numbers

import numpy as np
from sklearn.utils import check_array, check_consistent_length

from .exceptions import DomainError, ValidationError


def check_incomes(X) -> np.ndarray:
    """Return incomes as a 1-d float array; accepts shape (n,) or (n, 1)."""
    arr = np.asarray(X)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    arr = check_array(arr, dtype=np.float64, ensure_2d=True)
    if arr.shape[1] != 1:
        raise ValidationError(f"expected a single income column, got {arr.shape[1]} columns")
    incomes = arr[:, 0]
    bad = np.flatnonzero(incomes <= 0)
    if bad.size:
        raise ValidationError(f"row {int(bad[0]) + 1}: income must be > 0, got {incomes[bad[0]]!r}")
    return incomes


def check_type_labels(y, n: int) -> np.ndarray:
    if y is None:
        raise ValidationError("type labels are required")
    labels = np.asarray(y).ravel()
    check_consistent_length(labels, np.empty(n))
    return np.array([str(v) for v in labels], dtype=object)


def check_weights(sample_weight, n: int) -> np.ndarray:
    if sample_weight is None:
        return np.ones(n)
    w = check_array(np.asarray(sample_weight).reshape(-1, 1), dtype=np.float64)[:, 0]
    check_consistent_length(w, np.empty(n))
    bad = np.flatnonzero(w <= 0)
    if bad.size:
        raise ValidationError(f"row {int(bad[0]) + 1}: weight must be > 0, got {w[bad[0]]!r}")
    return w


def check_theta(theta) -> float:
    if isinstance(theta, str):
        if theta.strip().lower() != "inf":
            raise DomainError(f"theta must be a number or 'inf', got {theta!r}")
        return math.inf
    if not isinstance(theta, numbers.Real) or math.isnan(theta) or theta < 0:
        raise DomainError(f"theta must be >= 0, got {theta!r}")
    return float(theta)
