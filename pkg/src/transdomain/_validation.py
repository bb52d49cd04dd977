"""Input validation helpers shared by every module.

Thin wrappers around :func:`sklearn.utils.check_array` so that matrices and
vectors are always float64 NumPy arrays with finite entries.
"""

import numpy as np
from sklearn.utils import check_array


def check_matrix(M, name="matrix", allow_empty_rows=False):
    """Return ``M`` as a finite 2-D float64 array."""
    M = check_array(
        M,
        dtype=np.float64,
        ensure_2d=True,
        ensure_min_samples=0 if allow_empty_rows else 1,
        ensure_min_features=1,
        input_name=name,
    )
    return np.ascontiguousarray(M)


def check_vector(v, name="vector", length=None):
    """Return ``v`` as a finite 1-D float64 array, optionally of fixed length."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim == 2 and 1 in v.shape:
        v = v.ravel()
    if v.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains NaN or infinity")
    if length is not None and v.shape[0] != length:
        raise ValueError(f"{name} has length {v.shape[0]}, expected {length}")
    return v


def check_count(value, name, minimum=0):
    if int(value) != value or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)
