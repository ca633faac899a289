"""Input validation helpers shared by estimators and calculators."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils import check_array


def check_data(X, min_samples: int = 1) -> np.ndarray:
    """Finite 2-D float array with at least ``min_samples`` rows."""
    return check_array(X, dtype=np.float64, ensure_all_finite=True,
                       ensure_min_samples=min_samples, ensure_min_features=1)


def check_probability(x, name: str, *, lower_open=False, upper_open=False) -> float:
    if not isinstance(x, numbers.Real):
        raise TypeError(f"{name} must be a real number")
    lo_ok = x > 0 if lower_open else x >= 0
    hi_ok = x < 1 if upper_open else x <= 1
    if not (lo_ok and hi_ok):
        lb = "(" if lower_open else "["
        ub = ")" if upper_open else "]"
        raise ValueError(f"{name} must lie in {lb}0, 1{ub}, got {x}")
    return float(x)


def check_positive(x, name: str) -> float:
    if not isinstance(x, numbers.Real) or not x > 0 or not np.isfinite(x):
        raise ValueError(f"{name} must be a positive finite number, got {x}")
    return float(x)


def check_threshold(t) -> float:
    return check_probability(t, "threshold", lower_open=True, upper_open=True)
