# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops of the split-operator stepper.

All functions act on a C-contiguous ``(2, n)`` complex128 spinor array whose
rows are the ground and excited amplitudes. Complex arithmetic is spelled out
on interleaved float64 views so the compiler never emits the slow
IEEE-compliant complex multiply. Semantics match :mod:`fluortoa._pykernels`.
"""

import numpy as np


cdef inline void _axpy2(double* out, const double* a, const double* x,
                        const double* b, const double* y) noexcept nogil:
    # out = a*x + b*y for complex numbers stored as (re, im) pairs
    out[0] = a[0] * x[0] - a[1] * x[1] + b[0] * y[0] - b[1] * y[1]
    out[1] = a[0] * x[1] + a[1] * x[0] + b[0] * y[1] + b[1] * y[0]


def _as_real(arr):
    return arr.view(np.float64)


def apply_potential(psi, a11, a12, a22):
    """In place: (g, e) <- [[a11, a12], [a12, a22]] (g, e) at every grid point."""
    cdef double[:, ::1] p = _as_real(psi)
    cdef const double[::1] m11 = _as_real(a11)
    cdef const double[::1] m12 = _as_real(a12)
    cdef const double[::1] m22 = _as_real(a22)
    cdef Py_ssize_t j, n = p.shape[1] // 2
    cdef double g[2]
    cdef double e[2]
    with nogil:
        for j in range(n):
            g[0] = p[0, 2 * j]
            g[1] = p[0, 2 * j + 1]
            e[0] = p[1, 2 * j]
            e[1] = p[1, 2 * j + 1]
            _axpy2(&p[0, 2 * j], &m11[2 * j], g, &m12[2 * j], e)
            _axpy2(&p[1, 2 * j], &m12[2 * j], g, &m22[2 * j], e)


def apply_phase(psi, phase):
    """In place: multiply both rows by ``phase``."""
    cdef double[:, ::1] p = _as_real(psi)
    cdef const double[::1] f = _as_real(phase)
    cdef Py_ssize_t j, r, n = p.shape[1] // 2
    cdef double re, im
    with nogil:
        for r in range(2):
            for j in range(n):
                re = p[r, 2 * j]
                im = p[r, 2 * j + 1]
                p[r, 2 * j] = re * f[2 * j] - im * f[2 * j + 1]
                p[r, 2 * j + 1] = re * f[2 * j + 1] + im * f[2 * j]


def populations(psi):
    """Return (sum |g|^2 + |e|^2, sum |e|^2), without the dx factor."""
    cdef const double[:, ::1] p = _as_real(psi)
    cdef Py_ssize_t j, m = p.shape[1]
    cdef double sg = 0.0, se = 0.0
    with nogil:
        for j in range(m):
            sg += p[0, j] * p[0, j]
            se += p[1, j] * p[1, j]
    return sg + se, se


cdef inline double _point_density(const double[:, ::1] p, Py_ssize_t j) noexcept nogil:
    return (p[0, 2 * j] * p[0, 2 * j] + p[0, 2 * j + 1] * p[0, 2 * j + 1]
            + p[1, 2 * j] * p[1, 2 * j] + p[1, 2 * j + 1] * p[1, 2 * j + 1])


def edge_density(psi, Py_ssize_t width):
    """Largest |g|^2 + |e|^2 among the ``width`` points at either end of the grid."""
    cdef const double[:, ::1] p = _as_real(psi)
    cdef Py_ssize_t j, n = p.shape[1] // 2
    cdef double best = 0.0
    if width > n:
        width = n
    with nogil:
        for j in range(width):
            best = max(best, _point_density(p, j))
        for j in range(max(width, n - width), n):
            best = max(best, _point_density(p, j))
    return best
