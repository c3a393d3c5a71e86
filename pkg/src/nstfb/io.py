"""Plain-text matrix and vector files.

Format::

    M N real|complex
    a11 a12 ... a1N
    ...

Entries are whitespace separated and written with ``repr`` precision so
a write/read round trip is lossless.  Complex entries look like
``1.5-0.25i``.  A vector is stored as an ``n x 1`` matrix.
"""
from pathlib import Path

import numpy as np

__all__ = ["write_matrix", "read_matrix", "read_vector", "format_scalar", "parse_scalar"]


def format_scalar(z, is_complex):
    if not is_complex:
        return repr(float(z))
    re, im = repr(float(z.real)), repr(float(z.imag))
    sign = "" if im.startswith("-") else "+"
    return f"{re}{sign}{im}i"


def parse_scalar(token, is_complex):
    if not is_complex:
        return float(token)
    if not token.endswith("i"):
        return complex(float(token), 0.0)
    return complex(token[:-1] + "j")


def write_matrix(path, arr):
    """Write a 1-D or 2-D array; 1-D arrays become a single column."""
    arr = np.asarray(arr)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"can only write 1-D or 2-D arrays, got shape {arr.shape}")
    is_complex = np.iscomplexobj(arr)
    lines = [f"{arr.shape[0]} {arr.shape[1]} {'complex' if is_complex else 'real'}"]
    for row in arr:
        lines.append(" ".join(format_scalar(v, is_complex) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_matrix(path):
    """Read a matrix file into a float64 or complex128 array of shape (M, N)."""
    text = Path(path).read_text(encoding="utf-8").split("\n")
    lines = [ln for ln in text if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty matrix file")
    header = lines[0].split()
    if len(header) != 3 or header[2] not in ("real", "complex"):
        raise ValueError(f"{path}: bad header {lines[0]!r}; expected 'M N real|complex'")
    M, N = int(header[0]), int(header[1])
    is_complex = header[2] == "complex"
    rows = lines[1:]
    if len(rows) != M:
        raise ValueError(f"{path}: header says {M} rows, found {len(rows)}")
    out = np.empty((M, N), dtype=np.complex128 if is_complex else np.float64)
    for i, row in enumerate(rows):
        tokens = row.split()
        if len(tokens) != N:
            raise ValueError(f"{path}: row {i + 1} has {len(tokens)} entries, expected {N}")
        out[i] = [parse_scalar(tok, is_complex) for tok in tokens]
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{path}: non-finite entries")
    return out


def read_vector(path):
    """Read an ``n x 1`` (or ``1 x n``) matrix file as a 1-D array."""
    arr = read_matrix(path)
    if 1 not in arr.shape:
        raise ValueError(f"{path}: expected a vector, got shape {arr.shape}")
    return arr.ravel()
