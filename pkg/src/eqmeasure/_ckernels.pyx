# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops; see ``_kernels_py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, pow, exp, log

cnp.import_array()


def hyp2f1_series(double a, double b, double c, double[::1] z, long max_terms, double tol):
    cdef Py_ssize_t m = z.shape[0], i
    cdef long n, maxn = 0
    cdef double term, total
    out = np.empty(m)
    last = np.empty(m)
    cdef double[::1] o = out
    cdef double[::1] l = last
    for i in range(m):
        term = 1.0
        total = 1.0
        n = 0
        while n < max_terms:
            term = term * (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z[i]
            total += term
            n += 1
            if fabs(term) <= tol * fabs(total) or term == 0.0:
                break
        o[i] = total
        l[i] = fabs(term)
        if n > maxn:
            maxn = n
    return out, maxn, last


def column_recurrence(double[::1] col0, double[::1] col1, Py_ssize_t ncols,
                      double lam, double alpha, double shift, double sign):
    cdef Py_ssize_t m = col0.shape[0], i, n
    cdef double k1, k2, xv
    out_arr = np.zeros((ncols, m))
    cdef double[:, ::1] out = out_arr
    for i in range(m):
        out[0, i] = col0[i]
        if ncols > 1:
            out[1, i] = col1[i]
    for n in range(1, ncols - 1):
        k1 = (n - alpha - 1.0) * (2.0 * lam + n - 1.0) / (2.0 * n * (lam + n))
        k2 = (n + 1.0) * (2.0 * lam + n + alpha + 1.0) / (2.0 * (lam + n) * (2.0 * lam + n))
        for i in range(m):
            xv = 0.0
            if i + 1 < m:
                xv += (i + 2.0 * lam) / (2.0 * (i + 1.0 + lam)) * out[n, i + 1]
            if i > 0:
                xv += i / (2.0 * (i - 1.0 + lam)) * out[n, i - 1]
            out[n + 1, i] = (shift * out[n, i] + sign * xv - k1 * out[n - 1, i]) / k2
    return out_arr.T.copy()


def miller_ratios(double[::1] x, Py_ssize_t nmax, Py_ssize_t nstart, double lam, double alpha):
    cdef Py_ssize_t m = x.shape[0], j, n, i
    cdef double k1, k2, scale
    g_arr = np.zeros((m, nstart + 2))
    cdef double[:, ::1] g = g_arr
    for j in range(m):
        g[j, nstart] = 1e-300
        for n in range(nstart, 0, -1):
            k1 = (n - alpha - 1.0) * (2.0 * lam + n - 1.0) / (2.0 * n * (lam + n))
            k2 = (n + 1.0) * (2.0 * lam + n + alpha + 1.0) / (2.0 * (lam + n) * (2.0 * lam + n))
            g[j, n - 1] = (x[j] * g[j, n] - k2 * g[j, n + 1]) / k1
            if fabs(g[j, n - 1]) > 1e250:
                for i in range(n - 1, nstart + 2):
                    g[j, i] *= 1e-250
        scale = g[j, 0]
        for n in range(nstart + 2):
            g[j, n] /= scale
    return g_arr[:, :nmax].copy()


def pairwise_force(double[::1] x, double alpha, double beta):
    """Pairwise sum over sorted positions; each pair visited once."""
    cdef Py_ssize_t n = x.shape[0], i, j, p, q
    order = np.argsort(x, kind="stable")
    cdef Py_ssize_t[::1] idx = order.astype(np.intp)
    xs_arr = np.asarray(x)[order].copy()
    cdef double[::1] xs = xs_arr
    acc_arr = np.zeros(n)
    cdef double[::1] acc = acc_arr
    cdef double d, f, ea = alpha - 1.0, eb = beta - 1.0, ld
    cdef int ia = -1
    if ea == <int>ea and ea >= 0 and ea <= 8:
        ia = <int>ea
    for i in range(n):
        for j in range(i + 1, n):
            d = xs[j] - xs[i]
            if d <= 0.0:
                continue
            if ia >= 0:
                f = 1.0
                for p in range(ia):
                    f *= d
            else:
                f = pow(d, ea)
            f -= pow(d, eb)
            # pair (i, j) with x_j > x_i: K'(x_i - x_j) = -f, K'(x_j - x_i) = f
            acc[i] += f
            acc[j] -= f
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    for q in range(n):
        out[idx[q]] = acc[q] / n
    return out_arr
