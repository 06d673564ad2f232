# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: complex one-sided Jacobi and quaternion Cholesky.

Same contracts as ``lrqd._fallback``; arrays are modified in place.
"""
from libc.math cimport sqrt, fabs, copysign

name = "cython"


cdef inline double complex _dotc(double complex[:, ::1] m, Py_ssize_t p,
                                 Py_ssize_t q, Py_ssize_t n) noexcept nogil:
    cdef double complex acc = 0
    cdef Py_ssize_t i
    for i in range(n):
        acc = acc + m[p, i].conjugate() * m[q, i]
    return acc


cdef inline double _nrm2(double complex[:, ::1] m, Py_ssize_t p,
                         Py_ssize_t n) noexcept nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        acc += m[p, i].real * m[p, i].real + m[p, i].imag * m[p, i].imag
    return acc


cdef inline void _rotate(double complex[:, ::1] m, Py_ssize_t p, Py_ssize_t q,
                         Py_ssize_t n, double cs, double complex e_m,
                         double complex e_p) noexcept nogil:
    cdef Py_ssize_t i
    cdef double complex xp, xq
    for i in range(n):
        xp = m[p, i]
        xq = m[q, i]
        m[p, i] = cs * xp - e_m * xq
        m[q, i] = e_p * xp + cs * xq


def one_sided_jacobi(double complex[:, ::1] wt, double complex[:, ::1] vt,
                     double tol, double floor, int max_sweeps):
    cdef Py_ssize_t ncol = wt.shape[0]
    cdef Py_ssize_t nrow = wt.shape[1]
    cdef Py_ssize_t nv = vt.shape[1]
    cdef Py_ssize_t p, q
    cdef int sweep, rotated
    cdef double a, b, ac, zeta, t, cs, sn
    cdef double complex c, phase
    cdef int result = -1
    with nogil:
        for sweep in range(1, max_sweeps + 1):
            rotated = 0
            for p in range(ncol - 1):
                for q in range(p + 1, ncol):
                    a = _nrm2(wt, p, nrow)
                    b = _nrm2(wt, q, nrow)
                    c = _dotc(wt, p, q, nrow)
                    ac = sqrt(c.real * c.real + c.imag * c.imag)
                    if ac <= floor or ac <= tol * sqrt(a * b):
                        continue
                    rotated += 1
                    phase = c / ac
                    zeta = (b - a) / (2.0 * ac)
                    t = copysign(1.0, zeta) / (fabs(zeta) + sqrt(1.0 + zeta * zeta))
                    cs = 1.0 / sqrt(1.0 + t * t)
                    sn = cs * t
                    _rotate(wt, p, q, nrow, cs, sn * phase.conjugate(), sn * phase)
                    _rotate(vt, p, q, nv, cs, sn * phase.conjugate(), sn * phase)
            if rotated == 0:
                result = sweep
                break
    return result


cdef inline void _qmul(double aw, double ax, double ay, double az,
                       double bw, double bx, double by, double bz,
                       double* out) noexcept nogil:
    out[0] = aw * bw - ax * bx - ay * by - az * bz
    out[1] = aw * bx + ax * bw + ay * bz - az * by
    out[2] = aw * by - ax * bz + ay * bw + az * bx
    out[3] = aw * bz + ax * by - ay * bx + az * bw


def qcholesky(double[:, :, ::1] h, double[:, :, ::1] lower):
    cdef Py_ssize_t r = h.shape[1]
    cdef Py_ssize_t i, j, k, c
    cdef double d, ljj
    cdef double acc[4]
    cdef double prod[4]
    cdef Py_ssize_t result = -1
    with nogil:
        for c in range(4):
            for i in range(r):
                for j in range(r):
                    lower[c, i, j] = 0.0
        for j in range(r):
            d = h[0, j, j]
            for k in range(j):
                for c in range(4):
                    d -= lower[c, j, k] * lower[c, j, k]
            if not d > 0.0:
                result = j
                break
            ljj = sqrt(d)
            lower[0, j, j] = ljj
            for i in range(j + 1, r):
                for c in range(4):
                    acc[c] = h[c, i, j]
                for k in range(j):
                    _qmul(lower[0, i, k], lower[1, i, k], lower[2, i, k], lower[3, i, k],
                          lower[0, j, k], -lower[1, j, k], -lower[2, j, k], -lower[3, j, k],
                          prod)
                    for c in range(4):
                        acc[c] -= prod[c]
                for c in range(4):
                    lower[c, i, j] = acc[c] / ljj
    return result


def qcholesky_solve(double[:, :, ::1] lower, double[:, :, ::1] rhs):
    cdef Py_ssize_t r = lower.shape[1]
    cdef Py_ssize_t n = rhs.shape[2]
    cdef Py_ssize_t i, k, col, c
    cdef double prod[4]
    cdef double d
    with nogil:
        for i in range(r):
            d = lower[0, i, i]
            for col in range(n):
                for k in range(i):
                    _qmul(lower[0, i, k], lower[1, i, k], lower[2, i, k], lower[3, i, k],
                          rhs[0, k, col], rhs[1, k, col], rhs[2, k, col], rhs[3, k, col],
                          prod)
                    for c in range(4):
                        rhs[c, i, col] -= prod[c]
                for c in range(4):
                    rhs[c, i, col] /= d
        for i in range(r - 1, -1, -1):
            d = lower[0, i, i]
            for col in range(n):
                for k in range(i + 1, r):
                    _qmul(lower[0, k, i], -lower[1, k, i], -lower[2, k, i], -lower[3, k, i],
                          rhs[0, k, col], rhs[1, k, col], rhs[2, k, col], rhs[3, k, col],
                          prod)
                    for c in range(4):
                        rhs[c, i, col] -= prod[c]
                for c in range(4):
                    rhs[c, i, col] /= d
