# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scoring kernels for greedy trace-gain selection.

Mirrors ``pyfallback``: the large products stream through chunked BLAS-3
calls, while all per-candidate work (small quadratic forms, the r x r
Cholesky solve) runs in fused C loops to avoid per-call dispatch overhead
and the batched temporaries of the numpy path.
"""

import numpy as np

from libc.math cimport sqrt
from scipy.linalg.cython_blas cimport dgemm

NAME = "ext"


def rank1_gains(double[:, ::1] vectors, double[:, ::1] minv, double[:, ::1] q):
    """Trace gains (v^T q v) / (1 + v^T minv v) per row of ``vectors``."""
    cdef int n = vectors.shape[0]
    cdef int d = vectors.shape[1]
    cdef int chunk = max(1, 2_000_000 // max(d, 1))
    out_arr = np.empty(n, dtype=np.float64)
    tm_arr = np.empty((chunk, d), dtype=np.float64)
    tq_arr = np.empty((chunk, d), dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[:, ::1] tm = tm_arr
    cdef double[:, ::1] tq = tq_arr
    cdef int start, m, i, dd
    cdef double alpha = 1.0, beta = 0.0, s1, s2, v
    cdef char *no_trans = "N"
    with nogil:
        start = 0
        while start < n:
            m = chunk if start + chunk <= n else n - start
            # Row i of tm becomes minv @ v_i: in column-major terms this is
            # minv (d x d) times the chunk seen as a (d, m) matrix.
            dgemm(no_trans, no_trans, &d, &m, &d, &alpha,
                  &minv[0, 0], &d, &vectors[start, 0], &d, &beta, &tm[0, 0], &d)
            dgemm(no_trans, no_trans, &d, &m, &d, &alpha,
                  &q[0, 0], &d, &vectors[start, 0], &d, &beta, &tq[0, 0], &d)
            for i in range(m):
                s1 = 0.0
                s2 = 0.0
                for dd in range(d):
                    v = vectors[start + i, dd]
                    s1 += v * tm[i, dd]
                    s2 += v * tq[i, dd]
                out[start + i] = s2 / (1.0 + s1)
            start += m
    return out_arr


cdef inline int _cholesky_inplace(double[:, ::1] a, int r) nogil:
    """Lower Cholesky factor in place; -1 when not positive definite."""
    cdef int i, j, t
    cdef double acc
    for j in range(r):
        acc = a[j, j]
        for t in range(j):
            acc -= a[j, t] * a[j, t]
        if acc <= 0.0:
            return -1
        a[j, j] = sqrt(acc)
        for i in range(j + 1, r):
            acc = a[i, j]
            for t in range(j):
                acc -= a[i, t] * a[j, t]
            a[i, j] = acc / a[j, j]
    return 0


cdef inline double _solve_trace(
    double[:, ::1] chol, double[:, ::1] w, double[::1] y, double[::1] x, int r
) nogil:
    """trace(S^{-1} W) given the lower Cholesky factor of S."""
    cdef int c, i, t
    cdef double acc, tr = 0.0
    for c in range(r):
        for i in range(r):
            acc = w[i, c]
            for t in range(i):
                acc -= chol[i, t] * y[t]
            y[i] = acc / chol[i, i]
        for i in range(r - 1, -1, -1):
            acc = y[i]
            for t in range(i + 1, r):
                acc -= chol[t, i] * x[t]
            x[i] = acc / chol[i, i]
        tr += x[c]
    return tr


def lowrank_gains(double[:, :, ::1] factors, double[:, ::1] minv, double[:, ::1] q):
    """Trace gains tr((I + V^T minv V)^{-1} V^T q V) per stacked factor V.

    Candidate columns are stacked chunk-wise into a (dim, m*r) matrix so the
    two large products stream ``minv`` and ``q`` once per chunk; the
    remaining per-candidate work touches only r x dim blocks.
    """
    cdef int n = factors.shape[0]
    cdef int dim = factors.shape[1]
    cdef int r = factors.shape[2]
    cdef int chunk = max(1, 2_000_000 // max(dim * r, 1))
    out_arr = np.empty(n, dtype=np.float64)
    # cols holds V columns side by side: C-order (m*r, dim) == F-order (dim, m*r).
    cols_arr = np.empty((chunk * r, dim), dtype=np.float64)
    um_arr = np.empty((chunk * r, dim), dtype=np.float64)
    uq_arr = np.empty((chunk * r, dim), dtype=np.float64)
    s_arr = np.empty((r, r), dtype=np.float64)
    w_arr = np.empty((r, r), dtype=np.float64)
    y_arr = np.empty(r, dtype=np.float64)
    x_arr = np.empty(r, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[:, ::1] cols = cols_arr
    cdef double[:, ::1] um = um_arr
    cdef double[:, ::1] uq = uq_arr
    cdef double[:, ::1] s = s_arr
    cdef double[:, ::1] w = w_arr
    cdef double[::1] y = y_arr
    cdef double[::1] x = x_arr
    cdef int start, m, mcols, cand, base, i, j, dd, bad = -1
    cdef double alpha = 1.0, beta = 0.0, acc1, acc2, v
    cdef char *no_trans = "N"
    with nogil:
        start = 0
        while start < n:
            m = chunk if start + chunk <= n else n - start
            mcols = m * r
            # Transpose-copy the chunk's factors into stacked column form.
            for cand in range(m):
                for i in range(dim):
                    for j in range(r):
                        cols[cand * r + j, i] = factors[start + cand, i, j]
            # um/uq := minv @ cols and q @ cols, one big GEMM each
            # (all matrices addressed in column-major form).
            dgemm(no_trans, no_trans, &dim, &mcols, &dim, &alpha,
                  &minv[0, 0], &dim, &cols[0, 0], &dim, &beta, &um[0, 0], &dim)
            dgemm(no_trans, no_trans, &dim, &mcols, &dim, &alpha,
                  &q[0, 0], &dim, &cols[0, 0], &dim, &beta, &uq[0, 0], &dim)
            for cand in range(m):
                base = cand * r
                # s := I + V^T (minv V), w := V^T (q V); rows of the stacked
                # buffers are the columns of V, minv V, and q V.
                for i in range(r):
                    for j in range(r):
                        acc1 = 0.0
                        acc2 = 0.0
                        for dd in range(dim):
                            v = cols[base + i, dd]
                            acc1 += v * um[base + j, dd]
                            acc2 += v * uq[base + j, dd]
                        s[i, j] = acc1
                        w[i, j] = acc2
                    s[i, i] += 1.0
                if _cholesky_inplace(s, r) != 0:
                    if bad < 0:
                        bad = start + cand
                    out[start + cand] = 0.0
                    continue
                out[start + cand] = _solve_trace(s, w, y, x, r)
            start += m
    if bad >= 0:
        raise np.linalg.LinAlgError(
            f"inner system not positive definite for candidate {bad}"
        )
    return out_arr
