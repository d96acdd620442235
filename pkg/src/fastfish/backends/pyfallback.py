"""Pure-numpy scoring kernels, used when the compiled core is unavailable.

Both backends implement the same two functions and must agree to floating
point noise; the compiled core only trades the large batched temporaries of
this implementation for per-candidate BLAS calls.
"""

from __future__ import annotations

import numpy as np

NAME = "py"

# Cap (in float64 elements) on the batched (chunk, dim, r) temporaries.
_CHUNK_ELEMS = 4_000_000


def rank1_gains(vectors: np.ndarray, minv: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Trace gains for rank-1 factors.

    For each row ``v``: ``(v^T q v) / (1 + v^T minv v)`` where ``minv`` is the
    inverse accumulator and ``q = minv @ a @ minv`` for the pool target ``a``.
    """
    tm = vectors @ minv
    tq = vectors @ q
    denom = 1.0 + np.einsum("nd,nd->n", vectors, tm)
    numer = np.einsum("nd,nd->n", vectors, tq)
    return numer / denom


def lowrank_gains(factors: np.ndarray, minv: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Trace gains for stacked rank-r factors of shape (N, dim, r).

    For each factor ``V``: ``tr((I_r + V^T minv V)^{-1} V^T q V)``.

    All candidate columns in a chunk are stacked into one (dim, m*r) matrix
    so ``minv`` and ``q`` stream through a single compute-bound GEMM instead
    of being re-read per candidate.
    """
    n, dim, r = factors.shape
    out = np.empty(n)
    eye = np.eye(r)
    chunk = max(1, _CHUNK_ELEMS // max(dim * r, 1))
    for start in range(0, n, chunk):
        f = factors[start : start + chunk]
        m = f.shape[0]
        cols = np.swapaxes(f, 0, 1).reshape(dim, m * r)
        u = np.swapaxes((minv @ cols).reshape(dim, m, r), 0, 1)
        y = np.swapaxes((q @ cols).reshape(dim, m, r), 0, 1)
        ft = f.transpose(0, 2, 1)
        s = eye + np.matmul(ft, np.ascontiguousarray(u))
        w = np.matmul(ft, np.ascontiguousarray(y))
        out[start : start + m] = np.einsum("nii->n", np.linalg.solve(s, w))
    return out
