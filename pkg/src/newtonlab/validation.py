"""Input validation helpers shared by the estimators and the functional API."""
from __future__ import annotations

import os
from typing import Optional

import numpy as np
from sklearn.utils.validation import check_array

THREADS_ENV = "NEWTONLAB_THREADS"


def check_points(X) -> np.ndarray:
    """Coerce sample points to a 1-D complex array.

    Accepts a complex array-like of any shape (flattened), or a real
    array-like of shape (n, 2) holding ``[re, im]`` rows.
    """
    arr = np.asarray(X)
    if np.iscomplexobj(arr):
        arr = arr.astype(np.complex128).ravel()
        if not np.all(np.isfinite(arr)):
            raise ValueError("points must be finite")
        return arr
    if arr.ndim == 0 or arr.ndim == 1 and arr.dtype != object:
        arr = np.atleast_1d(arr).astype(np.float64)
        if not np.all(np.isfinite(arr)):
            raise ValueError("points must be finite")
        return arr.astype(np.complex128)
    arr = check_array(X, dtype=np.float64, ensure_2d=True)
    if arr.shape[1] != 2:
        raise ValueError(f"expected [re, im] rows (n, 2), got shape {arr.shape}")
    return arr[:, 0] + 1j * arr[:, 1]


def check_resolution(resolution) -> tuple:
    """``n`` or ``(nx, ny)`` -> ``(nx, ny)`` with both in [1, 16384]."""
    if np.isscalar(resolution):
        nx = ny = int(resolution)
    else:
        nx, ny = (int(v) for v in resolution)
    if not (1 <= nx <= 16384 and 1 <= ny <= 16384):
        raise ValueError(f"resolution out of range: {nx}x{ny}")
    return nx, ny


def check_positive(name: str, value, integer: bool = False):
    if integer:
        if int(value) != value or value < 1:
            raise ValueError(f"{name} must be a positive integer, got {value!r}")
        return int(value)
    if not (np.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be positive, got {value!r}")
    return float(value)


def worker_count(n_jobs: Optional[int] = None) -> int:
    """Explicit ``n_jobs``, else the NEWTONLAB_THREADS cap, else the CPU count."""
    if n_jobs is not None and n_jobs > 0:
        return int(n_jobs)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        if n > 0:
            return n
    return os.cpu_count() or 1
