"""Small input-validation helpers shared across the package."""

from __future__ import annotations

import numpy as np

from .errors import ValidationError


def wrap_unit(x):
    """Map positions onto the torus [0, 1). Works on scalars and arrays."""
    return x - np.floor(x)


def check_grid_size(n, minimum=8):
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise ValidationError(f"grid size must be an integer, got {n!r}")
    if n < minimum:
        raise ValidationError(f"grid size must be >= {minimum}, got {n}")
    return int(n)


def check_positive(name, value):
    v = float(value)
    if not np.isfinite(v) or v <= 0.0:
        raise ValidationError(f"{name} must be positive and finite, got {value!r}")
    return v


def check_probability_like(name, value, upper):
    v = float(value)
    if not (0.0 <= v < upper):
        raise ValidationError(f"{name} must lie in [0, {upper}), got {value!r}")
    return v


def as_float_array(name, values):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def as_positions(X):
    """Accept (m,) or (m, 1) position input and return a flat float array."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValidationError(f"positions must have shape (m,) or (m, 1), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("positions contain non-finite entries")
    return arr
