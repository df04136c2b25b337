# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops for embedding-row gradients and per-sample dot products."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def scatter_add_rows(double[:, ::1] table, const cnp.int64_t[::1] idx, const double[:, ::1] rows):
    """In place: ``table[idx[n]] += rows[n]`` for every n, duplicates accumulate."""
    cdef Py_ssize_t n, j, r
    cdef Py_ssize_t N = idx.shape[0]
    cdef Py_ssize_t D = rows.shape[1]
    cdef Py_ssize_t R = table.shape[0]
    if rows.shape[0] != N or table.shape[1] != D:
        raise ValueError("scatter_add_rows: shape mismatch")
    for n in range(N):
        if idx[n] < 0 or idx[n] >= R:
            raise IndexError(f"row {idx[n]} out of range")
    with nogil:
        for n in range(N):
            r = idx[n]
            for j in range(D):
                table[r, j] += rows[n, j]


def gather_rowdot(const double[:, ::1] table, const cnp.int64_t[::1] idx, const double[:, ::1] rows):
    """Return ``out[n] = table[idx[n]] . rows[n]``."""
    cdef Py_ssize_t n, j, r
    cdef Py_ssize_t N = idx.shape[0]
    cdef Py_ssize_t D = rows.shape[1]
    cdef Py_ssize_t R = table.shape[0]
    cdef double acc
    if rows.shape[0] != N or table.shape[1] != D:
        raise ValueError("gather_rowdot: shape mismatch")
    for n in range(N):
        if idx[n] < 0 or idx[n] >= R:
            raise IndexError(f"row {idx[n]} out of range")
    out = np.empty(N, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for n in range(N):
            r = idx[n]
            acc = 0.0
            for j in range(D):
                acc = acc + table[r, j] * rows[n, j]
            o[n] = acc
    return out


def outer_dot(const double[:, ::1] a, const double[:, ::1] delta, const double[:, ::1] V):
    """Return ``out[n] = sum_ij a[n,i] * delta[n,j] * V[i,j]``.

    Equals the dot product of the per-sample weight gradient ``outer(a[n], delta[n])``
    with ``V`` without materialising the outer product.
    """
    cdef Py_ssize_t n, i, j
    cdef Py_ssize_t N = a.shape[0]
    cdef Py_ssize_t I = a.shape[1]
    cdef Py_ssize_t J = delta.shape[1]
    cdef double acc, inner, ai
    if delta.shape[0] != N or V.shape[0] != I or V.shape[1] != J:
        raise ValueError("outer_dot: shape mismatch")
    out = np.empty(N, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for n in range(N):
            acc = 0.0
            for i in range(I):
                ai = a[n, i]
                if ai == 0.0:
                    continue
                inner = 0.0
                for j in range(J):
                    inner = inner + V[i, j] * delta[n, j]
                acc = acc + ai * inner
            o[n] = acc
    return out
