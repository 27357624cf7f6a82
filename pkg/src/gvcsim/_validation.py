"""Input validation helpers shared across the package."""

import math
import numbers

import numpy as np
from sklearn.utils import check_array


def check_matrix(X, name="X", *, ensure_min_samples=1, ensure_min_features=1):
    """Return ``X`` as a finite 2-D float64 array.

    Thin wrapper over :func:`sklearn.utils.check_array` that puts the
    argument name in the error message.
    """
    try:
        return check_array(
            X,
            dtype=np.float64,
            ensure_2d=True,
            ensure_all_finite=True,
            ensure_min_samples=ensure_min_samples,
            ensure_min_features=ensure_min_features,
            copy=False,
        )
    except ValueError as exc:
        raise ValueError(f"{name}: {exc}") from None


def check_vector(x, name="x", *, allow_empty=False):
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name}: expected a 1-D array, got shape {arr.shape}")
    if arr.size == 0 and not allow_empty:
        raise ValueError(f"{name}: empty array")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: contains NaN or infinity")
    return arr


def check_finite_scalar(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    return value


def check_positive(value, name, *, strict=True):
    value = check_finite_scalar(value, name)
    if strict and value <= 0:
        raise ValueError(f"{name} must be > 0, got {value}")
    if not strict and value < 0:
        raise ValueError(f"{name} must be >= 0, got {value}")
    return value


def check_int(value, name, *, minimum=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def frozen(arr):
    """Read-only float64 copy of ``arr``."""
    out = np.array(arr, dtype=np.float64)
    out.setflags(write=False)
    return out
