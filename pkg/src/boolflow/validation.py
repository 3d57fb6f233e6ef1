"""Input validation helpers shared across the package."""

from __future__ import annotations

from typing import Sequence

import numpy as np

__all__ = ["check_point", "check_sign_vector", "check_finite"]


def check_point(v: Sequence[float], n: int, name: str = "point") -> np.ndarray:
    """Coerce to a float vector of length ``n`` or raise ValueError."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.shape != (n,):
        raise ValueError(f"{name} has shape {arr.shape}, expected ({n},)")
    return arr


def check_finite(v: Sequence[float], n: int, name: str = "point") -> np.ndarray:
    arr = check_point(v, n, name)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_sign_vector(u: Sequence[float], n: int) -> np.ndarray:
    """Require every entry to be exactly +1 or -1."""
    arr = check_point(u, n, "sign vector")
    if not np.all(np.abs(arr) == 1.0):
        raise ValueError("sign vector entries must be exactly +1 or -1")
    return arr
