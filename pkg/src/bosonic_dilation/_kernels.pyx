# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled single-mode displacement kernels.

Same band-wise Laguerre recurrence and signatures as ``_kernels_py``; the
loops over grid points run without Python overhead and without
materializing a batch of matrices.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, exp

cnp.import_array()


cdef inline void _fill(double complex alpha, Py_ssize_t d, double[:] sq,
                       double complex[:, ::1] D) noexcept nogil:
    cdef Py_ssize_t k, n
    cdef double x = alpha.real * alpha.real + alpha.imag * alpha.imag
    cdef double complex head = exp(-0.5 * x)
    cdef double complex g, g_prev, g_next
    cdef double sign
    for k in range(d):
        if k:
            head = head * alpha / sq[k]
        sign = -1.0 if k % 2 else 1.0
        g_prev = 0
        g = head
        for n in range(d - k):
            D[n + k, n] = g
            if k:
                D[n, n + k] = sign * g.conjugate()
            g_next = ((2 * n + 1 + k - x) * g - sq[n] * sq[n + k] * g_prev) / (sq[n + 1] * sq[n + k + 1])
            g_prev = g
            g = g_next


def displacement_matrix(double complex alpha, int cutoff):
    D = np.zeros((cutoff, cutoff), dtype=np.complex128)
    cdef double complex[:, ::1] Dv = D
    cdef double[:] sq = np.sqrt(np.arange(2 * cutoff, dtype=np.float64))
    _fill(alpha, cutoff, sq, Dv)
    return D


def accumulate_displacements(alphas, weights, int cutoff):
    cdef const double complex[:] a = np.ascontiguousarray(alphas, dtype=np.complex128).ravel()
    cdef const double complex[:] w = np.ascontiguousarray(weights, dtype=np.complex128).ravel()
    cdef double[:] sq = np.sqrt(np.arange(2 * cutoff, dtype=np.float64))
    out_arr = np.zeros((cutoff, cutoff), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef double complex[:, ::1] D = np.zeros((cutoff, cutoff), dtype=np.complex128)
    cdef Py_ssize_t k, m, n, K = a.shape[0]
    cdef double complex wk
    with nogil:
        for k in range(K):
            wk = w[k]
            if wk == 0:
                continue
            _fill(a[k], cutoff, sq, D)
            for m in range(cutoff):
                for n in range(cutoff):
                    out[m, n] = out[m, n] + wk * D[m, n]
    return out_arr


def displacement_traces(T, alphas):
    cdef const double complex[:, ::1] Tm = np.ascontiguousarray(T, dtype=np.complex128)
    cdef const double complex[:] a = np.ascontiguousarray(alphas, dtype=np.complex128).ravel()
    cdef Py_ssize_t d = Tm.shape[0]
    cdef double[:] sq = np.sqrt(np.arange(2 * d, dtype=np.float64))
    cdef double complex[:, ::1] D = np.zeros((d, d), dtype=np.complex128)
    out_arr = np.empty(a.shape[0], dtype=np.complex128)
    cdef double complex[:] out = out_arr
    cdef Py_ssize_t k, m, n
    cdef double complex acc
    with nogil:
        for k in range(a.shape[0]):
            _fill(a[k], d, sq, D)
            acc = 0
            for m in range(d):
                for n in range(d):
                    acc = acc + Tm[n, m] * D[m, n]
            out[k] = acc
    return out_arr
