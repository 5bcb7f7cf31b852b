# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Conjugate-gradient solver on CSR matrices, compiled hot path.

Same algorithm and control flow as ``cg_numpy.cg_csr``; the two backends are
interchangeable up to floating-point summation order.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


cdef void _matvec(const int[::1] indptr, const int[::1] indices,
                  const double[::1] data, const double[::1] x,
                  double[::1] out) noexcept nogil:
    cdef Py_ssize_t i, j, n = indptr.shape[0] - 1
    cdef double acc
    for i in range(n):
        acc = 0.0
        for j in range(indptr[i], indptr[i + 1]):
            acc += data[j] * x[indices[j]]
        out[i] = acc


cdef double _dot(const double[::1] a, const double[::1] b) noexcept nogil:
    cdef Py_ssize_t i, n = a.shape[0]
    cdef double acc = 0.0
    for i in range(n):
        acc += a[i] * b[i]
    return acc


def cg_csr(const int[::1] indptr, const int[::1] indices,
           const double[::1] data, const double[::1] b,
           const double[::1] x0, double tol, long max_iter):
    """Solve A x = b for SPD CSR A; returns (x, iterations, relative residual)."""
    cdef Py_ssize_t i, n = b.shape[0]
    cdef double bnorm = sqrt(_dot(b, b))

    x_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] x = x_arr
    if bnorm == 0.0:
        return x_arr, 0, 0.0

    r_arr = np.empty(n, dtype=np.float64)
    p_arr = np.empty(n, dtype=np.float64)
    ap_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] r = r_arr
    cdef double[::1] p = p_arr
    cdef double[::1] ap = ap_arr

    cdef double rs, rs_new, rs_true, alpha, beta
    cdef long iterations = 0

    with nogil:
        for i in range(n):
            x[i] = x0[i]
        _matvec(indptr, indices, data, x, ap)
        for i in range(n):
            r[i] = b[i] - ap[i]
        rs = _dot(r, r)

    if sqrt(rs) <= tol * bnorm:
        return x_arr, 0, sqrt(rs) / bnorm

    with nogil:
        for i in range(n):
            p[i] = r[i]
        while iterations < max_iter:
            _matvec(indptr, indices, data, p, ap)
            alpha = rs / _dot(p, ap)
            for i in range(n):
                x[i] += alpha * p[i]
                r[i] -= alpha * ap[i]
            rs_new = _dot(r, r)
            iterations += 1
            if sqrt(rs_new) <= tol * bnorm:
                # Guard against recurrence drift before declaring convergence.
                _matvec(indptr, indices, data, x, ap)
                for i in range(n):
                    r[i] = b[i] - ap[i]
                rs_true = _dot(r, r)
                if sqrt(rs_true) <= tol * bnorm:
                    with gil:
                        return x_arr, iterations, sqrt(rs_true) / bnorm
                for i in range(n):
                    p[i] = r[i]
                rs = rs_true
                continue
            beta = rs_new / rs
            for i in range(n):
                p[i] = r[i] + beta * p[i]
            rs = rs_new

        _matvec(indptr, indices, data, x, ap)
        for i in range(n):
            r[i] = b[i] - ap[i]
        rs_true = _dot(r, r)

    return x_arr, iterations, sqrt(rs_true) / bnorm
