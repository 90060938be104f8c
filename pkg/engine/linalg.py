"""
Exact linear algebra over the Gaussian rationals.

Matrices are numpy object arrays of GaussRat; elimination is Gauss–Jordan
with exact division, so images, ranks and inverses carry no rounding.
"""

import logging
from typing import List, Tuple

import numpy as np

from engine.scalars import GaussRat

logger = logging.getLogger(__name__)


def zeros(rows: int, cols: int) -> np.ndarray:
    m = np.empty((rows, cols), dtype=object)
    for idx in np.ndindex(rows, cols):
        m[idx] = GaussRat(0)
    return m


def identity(n: int) -> np.ndarray:
    m = zeros(n, n)
    for i in range(n):
        m[i, i] = GaussRat(1)
    return m


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
    out = zeros(a.shape[0], b.shape[1])
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            total = GaussRat(0)
            for k in range(a.shape[1]):
                if a[i, k] and b[k, j]:
                    total = total + a[i, k] * b[k, j]
            out[i, j] = total
    return out


def conj_transpose(m: np.ndarray) -> np.ndarray:
    out = zeros(m.shape[1], m.shape[0])
    for i, j in np.ndindex(*m.shape):
        out[j, i] = m[i, j].conjugate()
    return out


def is_zero(m: np.ndarray) -> bool:
    return not any(bool(x) for x in m.flat)


def rref(m: np.ndarray) -> Tuple[np.ndarray, List[int]]:
    """Reduced row echelon form and the pivot columns."""
    x = m.copy()
    rows, cols = x.shape
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        pivot = next((i for i in range(r, rows) if x[i, c]), None)
        if pivot is None:
            continue
        if pivot != r:
            x[[r, pivot], :] = x[[pivot, r], :]
        inv = x[r, c].inverse()
        for j in range(cols):
            x[r, j] = x[r, j] * inv
        for i in range(rows):
            if i != r and x[i, c]:
                factor = x[i, c]
                for j in range(cols):
                    if x[r, j]:
                        x[i, j] = x[i, j] - factor * x[r, j]
        pivots.append(c)
        r += 1
    return x, pivots


def rank(m: np.ndarray) -> int:
    if m.size == 0:
        return 0
    return len(rref(m)[1])


def inverse(m: np.ndarray) -> np.ndarray:
    """Exact inverse; raises ZeroDivisionError for singular input."""
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("inverse of a non-square matrix")
    aug = zeros(n, 2 * n)
    aug[:, :n] = m
    aug[:, n:] = identity(n)
    r, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return r[:, n:]
