"""Input validation helpers.

scikit-learn's ``check_array`` rejects complex input, which the
super-resolution path needs, so the checks here are written against
plain numpy and accept real or complex data.
"""
import numbers

import numpy as np


def _as_inexact(arr, name):
    arr = np.asarray(arr)
    if arr.dtype.kind == "c":
        arr = arr.astype(np.complex128, copy=False)
    elif arr.dtype.kind in "biuf":
        arr = arr.astype(np.float64, copy=False)
    else:
        raise TypeError(f"{name} must be numeric, got dtype {arr.dtype}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_matrix(A, name="A"):
    """Return ``A`` as a finite 2-D float64 or complex128 array."""
    A = _as_inexact(A, name)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {A.shape}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"{name} must be non-empty, got shape {A.shape}")
    return A


def check_vector(v, length=None, name="y"):
    """Return ``v`` as a finite 1-D array, optionally of a fixed length.

    A column of shape ``(n, 1)`` is flattened.
    """
    v = _as_inexact(v, name)
    if v.ndim == 2 and v.shape[1] == 1:
        v = v[:, 0]
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {v.shape}")
    if length is not None and v.shape[0] != length:
        raise ValueError(f"{name} has length {v.shape[0]}, expected {length}")
    return v


def check_system(A, y):
    """Validate a measurement pair and return ``(A, y)``.

    The result dtype is promoted so that both share a scalar field.
    """
    A = check_matrix(A)
    y = check_vector(y, A.shape[0])
    if np.iscomplexobj(A) or np.iscomplexobj(y):
        A = A.astype(np.complex128, copy=False)
        y = y.astype(np.complex128, copy=False)
    return A, y


def check_count(value, name, low=1, high=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < low or (high is not None and value > high):
        bound = f"[{low}, {high}]" if high is not None else f">= {low}"
        raise ValueError(f"{name} must be in {bound}, got {value}")
    return value
