"""Input checks shared by the estimator classes and the CLI."""

from __future__ import annotations

import math
import numbers

import numpy as np


def check_points(X, name="X"):
    """Flatten ``X`` (shape ``(n,)`` or ``(n, 1)``) into a 1-d complex array."""
    arr = np.asarray(X)
    if arr.dtype == object:
        try:
            arr = arr.astype(complex)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"{name} must contain numbers") from exc
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"{name} must have shape (n,) or (n, 1), got {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.issubdtype(arr.dtype, np.number):
        raise ValueError(f"{name} must be numeric, got dtype {arr.dtype}")
    arr = arr.astype(complex)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinity")
    return arr


def check_open_unit(value, name):
    """Require ``0 < value < 1``; strings and mpf are accepted and returned unchanged."""
    try:
        v = float(value)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{name} must be a real number, got {value!r}") from exc
    if not 0.0 < v < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {value!r}")
    return value


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be at least {minimum}, got {value}")
    return int(value)


def check_decreasing_grid(grid, name="r_grid", min_length=1):
    """Strictly decreasing sequence of reals in (0, 1)."""
    values = list(grid)
    if len(values) < min_length:
        raise ValueError(f"{name} needs at least {min_length} entries, got {len(values)}")
    floats = [float(v) for v in values]
    if any(not (0.0 < v < 1.0) or math.isnan(v) for v in floats):
        raise ValueError(f"{name} entries must lie in (0, 1)")
    if any(b >= a for a, b in zip(floats, floats[1:])):
        raise ValueError(f"{name} must be strictly decreasing")
    return values
