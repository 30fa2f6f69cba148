# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the routines in ``_kernels_py``."""
import numpy as np

from libc.math cimport INFINITY


cdef inline double _gap(const double[:, ::1] ys, const double[:, ::1] yss,
                        const double[::1] x, const double[::1] xs,
                        Py_ssize_t i) noexcept nogil:
    cdef Py_ssize_t j
    cdef double s = 0.0
    for j in range(ys.shape[1]):
        s += (x[j] - ys[i, j]) * (xs[j] - yss[i, j])
    return s


def min_gap(const double[:, ::1] ys, const double[:, ::1] yss,
            const double[::1] x, const double[::1] xs):
    cdef Py_ssize_t i
    cdef double g, best = INFINITY
    with nogil:
        for i in range(ys.shape[0]):
            g = _gap(ys, yss, x, xs, i)
            if g < best:
                best = g
    return best


def min_gap_many(const double[:, ::1] ys, const double[:, ::1] yss,
                 const double[:, ::1] X, const double[:, ::1] XS):
    cdef Py_ssize_t k, i, j
    cdef Py_ssize_t m = ys.shape[0], n = ys.shape[1]
    cdef double s, best
    out = np.empty(X.shape[0])
    cdef double[::1] o = out
    with nogil:
        for k in range(X.shape[0]):
            best = INFINITY
            for i in range(m):
                s = 0.0
                for j in range(n):
                    s += (X[k, j] - ys[i, j]) * (XS[k, j] - yss[i, j])
                if s < best:
                    best = s
            o[k] = best
    return out


def min_pairwise_gap(const double[:, ::1] ys, const double[:, ::1] yss):
    cdef Py_ssize_t i, k, j
    cdef Py_ssize_t m = ys.shape[0], n = ys.shape[1]
    cdef double s, best = INFINITY
    with nogil:
        for i in range(m - 1):
            for k in range(i + 1, m):
                s = 0.0
                for j in range(n):
                    s += (ys[i, j] - ys[k, j]) * (yss[i, j] - yss[k, j])
                if s < best:
                    best = s
    return best


def fitz_max(const double[:, ::1] ys, const double[:, ::1] yss,
             const double[::1] x, const double[::1] xs):
    cdef Py_ssize_t i, j
    cdef double s, best = -INFINITY
    with nogil:
        for i in range(ys.shape[0]):
            s = 0.0
            for j in range(ys.shape[1]):
                s += ys[i, j] * xs[j] + x[j] * yss[i, j] - ys[i, j] * yss[i, j]
            if s > best:
                best = s
    return best


def fitz_max_many(const double[:, ::1] ys, const double[:, ::1] yss,
                  const double[:, ::1] X, const double[:, ::1] XS):
    cdef Py_ssize_t k, i, j
    cdef Py_ssize_t m = ys.shape[0], n = ys.shape[1]
    cdef double s, best
    # <y_i, y*_i> once per sample
    diag_arr = np.empty(m)
    cdef double[::1] diag = diag_arr
    out = np.empty(X.shape[0])
    cdef double[::1] o = out
    with nogil:
        for i in range(m):
            s = 0.0
            for j in range(n):
                s += ys[i, j] * yss[i, j]
            diag[i] = s
        for k in range(X.shape[0]):
            best = -INFINITY
            for i in range(m):
                s = -diag[i]
                for j in range(n):
                    s += ys[i, j] * XS[k, j] + X[k, j] * yss[i, j]
                if s > best:
                    best = s
            o[k] = best
    return out
