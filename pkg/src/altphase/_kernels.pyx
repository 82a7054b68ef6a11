# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: elementwise phase application and a fused dense
CGNR loop (matvecs through BLAS zgemv, vector updates in C)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt
from scipy.linalg.cython_blas cimport zgemv

cnp.import_array()

cdef double complex Z_ONE = 1.0
cdef double complex Z_ZERO = 0.0
cdef int INC1 = 1


def apply_phases(double complex[::1] z, double[::1] y):
    """Elementwise ``(z_i / |z_i|) * y_i`` with the convention 0/|0| == 1."""
    cdef Py_ssize_t i, n = z.shape[0]
    if y.shape[0] != n:
        raise ValueError("z and y must have the same length")
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef double re, im, mag
    for i in range(n):
        re = z[i].real
        im = z[i].imag
        mag = sqrt(re * re + im * im)
        if mag == 0.0:
            o[i] = y[i]
        else:
            o[i] = (z[i] / mag) * y[i]
    return out


cdef double _norm2(double complex[::1] v) noexcept:
    cdef Py_ssize_t i
    cdef double acc = 0.0, re, im
    for i in range(v.shape[0]):
        re = v[i].real
        im = v[i].imag
        acc += re * re + im * im
    return acc


def cgnr_dense(double complex[:, ::1] rows, double complex[:, ::1] cols,
               double complex[::1] b, double complex[::1] x0,
               double tol, int max_iters):
    """Conjugate gradient on the normal equations of ``min ||rows @ x - b||``.

    Mirrors ``altphase._kernels_py.cgnr_dense``; see there for the contract.
    """
    cdef int m = <int> rows.shape[0]
    cdef int n = <int> rows.shape[1]
    if cols.shape[0] != n or cols.shape[1] != m:
        raise ValueError("cols must be the conjugate transpose of rows")
    if b.shape[0] != m or x0.shape[0] != n:
        raise ValueError("b must have length m and x0 length n")

    x_arr = np.array(x0, dtype=np.complex128, copy=True)
    r_arr = np.empty(m, dtype=np.complex128)
    q_arr = np.empty(m, dtype=np.complex128)
    s_arr = np.empty(n, dtype=np.complex128)
    p_arr = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] x = x_arr
    cdef double complex[::1] r = r_arr
    cdef double complex[::1] q = q_arr
    cdef double complex[::1] s = s_arr
    cdef double complex[::1] p = p_arr

    cdef double complex MINUS_ONE = -1.0
    cdef Py_ssize_t i
    cdef double gamma, gamma_next, qq, ref, threshold
    cdef double complex alpha, beta
    cdef int it = 0

    # rows is C-contiguous (m, n): BLAS sees its transpose as an n x m
    # Fortran array, so trans='T' gives rows @ v.  Same trick for cols.
    zgemv("T", &m, &n, &Z_ONE, &cols[0, 0], &m, &b[0], &INC1, &Z_ZERO, &s[0], &INC1)
    ref = sqrt(_norm2(s))
    threshold = tol * ref

    # r = b - rows @ x
    for i in range(m):
        r[i] = b[i]
    zgemv("T", &n, &m, &MINUS_ONE, &rows[0, 0], &n, &x[0], &INC1, &Z_ONE, &r[0], &INC1)
    zgemv("T", &m, &n, &Z_ONE, &cols[0, 0], &m, &r[0], &INC1, &Z_ZERO, &s[0], &INC1)
    gamma = _norm2(s)
    for i in range(n):
        p[i] = s[i]

    while it < max_iters and sqrt(gamma) > threshold:
        zgemv("T", &n, &m, &Z_ONE, &rows[0, 0], &n, &p[0], &INC1, &Z_ZERO, &q[0], &INC1)
        qq = _norm2(q)
        if qq == 0.0:
            break
        alpha = gamma / qq
        for i in range(n):
            x[i] = x[i] + alpha * p[i]
        for i in range(m):
            r[i] = r[i] - alpha * q[i]
        zgemv("T", &m, &n, &Z_ONE, &cols[0, 0], &m, &r[0], &INC1, &Z_ZERO, &s[0], &INC1)
        gamma_next = _norm2(s)
        beta = gamma_next / gamma
        for i in range(n):
            p[i] = s[i] + beta * p[i]
        gamma = gamma_next
        it += 1

    return x_arr, it, bool(sqrt(gamma) <= threshold)
