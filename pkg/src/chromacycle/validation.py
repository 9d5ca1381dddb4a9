"""Input validation helpers shared across modules."""

from __future__ import annotations

import numpy as np

from .errors import ShapeMismatchError


def check_finite(arr: np.ndarray, name: str = "array") -> np.ndarray:
    arr = np.asarray(arr)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite components")
    return arr


def check_range(arr: np.ndarray, lo: float, hi: float, name: str = "array") -> np.ndarray:
    """Require every component finite and inside [lo, hi]."""
    arr = check_finite(arr, name=name)
    amin, amax = arr.min(), arr.max()
    if amin < lo or amax > hi:
        raise ValueError(
            f"{name} components outside [{lo}, {hi}]: observed [{amin}, {amax}]"
        )
    return arr


def check_plane(arr, name: str = "plane") -> np.ndarray:
    """Coerce to a float64 H x W array with H, W >= 1."""
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeMismatchError(f"{name} must be a 2-D H x W array, got shape {arr.shape}")
    return arr


def check_positive(value, name: str):
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def check_count(value, name: str, minimum: int = 1) -> int:
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value
