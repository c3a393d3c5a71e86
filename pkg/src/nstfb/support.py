"""Support sets and deterministic hard-thresholding index selection.

A support set is represented as a sorted, duplicate-free 1-D ``intp``
array; its size is ``len(T)``.
"""
import numpy as np

__all__ = ["as_support", "top_k", "complement", "sym_diff", "hard_threshold"]


def as_support(indices, n=None):
    """Validate and canonicalise column indices into a support set."""
    T = np.asarray(indices, dtype=np.intp).ravel()
    T = np.sort(T)
    if T.size and np.any(T[1:] == T[:-1]):
        raise ValueError("support contains duplicate indices")
    if T.size and T[0] < 0:
        raise ValueError("support indices must be non-negative")
    if n is not None and T.size and T[-1] >= n:
        raise ValueError(f"support index {T[-1]} out of range for N={n}")
    return T


def top_k(v, k):
    """Indices of the ``k`` largest magnitudes of ``v``, sorted ascending.

    Ties at the selection boundary go to the smaller index.  Runs in
    linear time via partial selection of the k-th largest magnitude, so
    the only sort is over the ``k`` returned indices.

    Examples
    --------
    >>> top_k([3, -5, 2], 2)
    array([0, 1])
    >>> top_k([1, 1, 1], 2)
    array([0, 1])
    """
    mags = np.abs(np.asarray(v))
    n = mags.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= {n}, got {k}")
    if k == n:
        return np.arange(n, dtype=np.intp)
    kth = np.partition(mags, n - k)[n - k]
    above = np.flatnonzero(mags > kth)
    tied = np.flatnonzero(mags == kth)[: k - above.size]
    return np.sort(np.concatenate((above, tied))).astype(np.intp, copy=False)


def hard_threshold(v, k):
    """Keep the ``k`` largest-magnitude entries of ``v`` and zero the rest."""
    v = np.asarray(v)
    T = top_k(v, k)
    out = np.zeros_like(v)
    out[T] = v[T]
    return out, T


def complement(T, n):
    """Sorted ``{0, ..., n-1}`` minus ``T``."""
    mask = np.ones(n, dtype=bool)
    mask[np.asarray(T, dtype=np.intp)] = False
    return np.flatnonzero(mask).astype(np.intp, copy=False)


def sym_diff(T, U):
    """Sorted symmetric difference of two supports."""
    return np.setxor1d(
        np.asarray(T, dtype=np.intp), np.asarray(U, dtype=np.intp)
    ).astype(np.intp, copy=False)
