# cython: language_level=3
"""Compiled convolution-history kernels.

Same signatures and semantics as :mod:`ekrelax._kernels_py`.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport pow, tgamma

cnp.import_array()

BACKEND = "compiled"


def trapezoid_history(const double[::1] t, const double[:, ::1] f,
                      Py_ssize_t n, double order, Py_ssize_t start=0):
    cdef Py_ssize_t m = f.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hist = np.zeros(m)
    if n <= start:
        return hist, 0.0

    cdef double tn = t[n]
    cdef double g = tgamma(order)
    cdef double left, right, width, pl, pr, i0, i1, wl, wr
    cdef double wr_prev = 0.0
    cdef Py_ssize_t j, r

    # node j receives wl from interval j and wr from interval j - 1
    pl = pow(tn - t[start], order)
    for j in range(start, n):
        left = tn - t[j]
        right = tn - t[j + 1]
        width = t[j + 1] - t[j]
        pr = pow(right, order) if right > 0.0 else 0.0
        i0 = (pl - pr) / order
        i1 = (pl * left - pr * right) / (order + 1.0)
        wl = (i1 - right * i0) / (width * g)
        wr = (left * i0 - i1) / (width * g)
        for r in range(m):
            hist[r] += (wl + wr_prev) * f[r, j]
        wr_prev = wr
        pl = pr
    return hist, wr_prev


def rectangle_history(const double[::1] t, const double[:, ::1] f,
                      Py_ssize_t n, double order, Py_ssize_t start=0):
    cdef Py_ssize_t m = f.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hist = np.zeros(m)
    if n <= start:
        return hist

    cdef double tn = t[n]
    cdef double g = tgamma(order + 1.0)
    cdef double pl, pr, b
    cdef Py_ssize_t j, r

    pl = pow(tn - t[start], order)
    for j in range(start, n):
        pr = pow(tn - t[j + 1], order) if tn > t[j + 1] else 0.0
        b = (pl - pr) / g
        for r in range(m):
            hist[r] += b * f[r, j]
        pl = pr
    return hist


def gl_history(const double[::1] omega, const double[:, ::1] x, Py_ssize_t n):
    cdef Py_ssize_t m = x.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(m)
    cdef Py_ssize_t k, r
    cdef double acc
    for r in range(m):
        acc = 0.0
        for k in range(1, n + 1):
            acc += omega[k] * x[r, n - k]
        out[r] = acc
    return out


def rl_integral_all(const double[::1] t, const double[::1] f, double order):
    cdef Py_ssize_t size = t.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(size)
    cdef double g = tgamma(order)
    cdef double tn, left, right, width, pl, pr, i0, i1, wl, wr, wr_prev, acc
    cdef Py_ssize_t n, j

    for n in range(1, size):
        tn = t[n]
        acc = 0.0
        wr_prev = 0.0
        pl = pow(tn - t[0], order)
        for j in range(0, n):
            left = tn - t[j]
            right = tn - t[j + 1]
            width = t[j + 1] - t[j]
            pr = pow(right, order) if right > 0.0 else 0.0
            i0 = (pl - pr) / order
            i1 = (pl * left - pr * right) / (order + 1.0)
            wl = (i1 - right * i0) / (width * g)
            wr = (left * i0 - i1) / (width * g)
            acc += (wl + wr_prev) * f[j]
            wr_prev = wr
            pl = pr
        out[n] = acc + wr_prev * f[n]
    return out


def trapezoid_history_uniform(const double[::1] kp, const double[::1] kp1, double scale,
                              const double[:, ::1] f, Py_ssize_t n, double order,
                              Py_ssize_t start=0):
    cdef Py_ssize_t m = f.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hist = np.zeros(m)
    if n <= start:
        return hist, 0.0

    cdef double left, right, i0, i1, wl, wr
    cdef double wr_prev = 0.0
    cdef double inv_a = 1.0 / order
    cdef double inv_a1 = 1.0 / (order + 1.0)
    cdef Py_ssize_t j, r, k

    for j in range(start, n):
        k = n - j
        left = <double>k
        right = left - 1.0
        i0 = (kp[k] - kp[k - 1]) * inv_a
        i1 = (kp1[k] - kp1[k - 1]) * inv_a1
        wl = (i1 - right * i0) * scale
        wr = (left * i0 - i1) * scale
        for r in range(m):
            hist[r] += (wl + wr_prev) * f[r, j]
        wr_prev = wr
    return hist, wr_prev


def rectangle_history_uniform(const double[::1] kp, double scale, const double[:, ::1] f,
                              Py_ssize_t n, double order, Py_ssize_t start=0):
    cdef Py_ssize_t m = f.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hist = np.zeros(m)
    if n <= start:
        return hist
    cdef double b
    cdef Py_ssize_t j, r, k
    for j in range(start, n):
        k = n - j
        b = (kp[k] - kp[k - 1]) * scale
        for r in range(m):
            hist[r] += b * f[r, j]
    return hist
