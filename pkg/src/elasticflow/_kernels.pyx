# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: banded elimination and trigonometric evaluation."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, M_PI

cnp.import_array()


def penta_solve(double[::1] a, double[::1] b, double[::1] c,
                double[::1] d, double[::1] e, rhs):
    """Solve a (non-cyclic) pentadiagonal system without pivoting.

    Row ``i`` reads ``a[i] x[i-2] + b[i] x[i-1] + c[i] x[i] + d[i] x[i+1]
    + e[i] x[i+2]``; entries reaching outside ``0..n-1`` are ignored.
    ``rhs`` is ``(n,)`` or ``(n, m)``.
    """
    cdef Py_ssize_t n = c.shape[0]
    cdef Py_ssize_t i, j, m
    cdef double l1, l2
    R_in = np.asarray(rhs, dtype=np.float64)
    squeeze = R_in.ndim == 1
    cdef double[:, ::1] R = np.ascontiguousarray(R_in.reshape(n, -1)).copy()
    m = R.shape[1]
    cdef double[::1] B = np.array(b, copy=True)
    cdef double[::1] C = np.array(c, copy=True)
    cdef double[::1] D = np.array(d, copy=True)

    for i in range(n - 1):
        l1 = B[i + 1] / C[i]
        C[i + 1] -= l1 * D[i]
        D[i + 1] -= l1 * e[i]
        for j in range(m):
            R[i + 1, j] -= l1 * R[i, j]
        if i + 2 < n:
            l2 = a[i + 2] / C[i]
            B[i + 2] -= l2 * D[i]
            C[i + 2] -= l2 * e[i]
            for j in range(m):
                R[i + 2, j] -= l2 * R[i, j]

    for j in range(m):
        R[n - 1, j] /= C[n - 1]
        if n > 1:
            R[n - 2, j] = (R[n - 2, j] - D[n - 2] * R[n - 1, j]) / C[n - 2]
    for i in range(n - 3, -1, -1):
        for j in range(m):
            R[i, j] = (R[i, j] - D[i] * R[i + 1, j] - e[i] * R[i + 2, j]) / C[i]

    out = np.asarray(R)
    return out[:, 0].copy() if squeeze else out


def trig_eval(coef, double[::1] u, Py_ssize_t n):
    """Evaluate real trigonometric interpolants at arbitrary parameters.

    ``coef`` holds ``numpy.fft.rfft(f) / n`` for ``n`` samples of period-1
    data, shape ``(n//2 + 1,)`` or ``(n//2 + 1, m)``.
    """
    C_in = np.asarray(coef, dtype=np.complex128)
    squeeze = C_in.ndim == 1
    cdef double complex[:, ::1] cf = np.ascontiguousarray(C_in.reshape(C_in.shape[0], -1))
    cdef Py_ssize_t nh = cf.shape[0] - 1
    cdef Py_ssize_t m = cf.shape[1]
    cdef Py_ssize_t p = u.shape[0]
    cdef Py_ssize_t i, q, j
    cdef double complex w, z
    cdef double[:, ::1] out = np.zeros((p, m))
    cdef double last_w = 1.0 if n % 2 == 0 else 2.0
    for i in range(p):
        w = cos(2.0 * M_PI * u[i]) + 1j * sin(2.0 * M_PI * u[i])
        for j in range(m):
            out[i, j] = cf[0, j].real
        z = w
        for q in range(1, nh):
            for j in range(m):
                out[i, j] += 2.0 * (cf[q, j] * z).real
            z = z * w
        # even n: the Nyquist coefficient enters once (real cosine)
        if nh > 0:
            for j in range(m):
                out[i, j] += last_w * (cf[nh, j] * z).real
    res = np.asarray(out)
    return res[:, 0].copy() if squeeze else res
