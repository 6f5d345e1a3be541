# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled RK4 stepping for ``i da/dz = M(z) a`` on a tabulated generator.

``mats`` holds ``M`` at the stage abscissae of ``nsteps`` steps:
``mats[2s] = M(z_s)``, ``mats[2s+1] = M(z_s + h/2)``, ``mats[2s+2] = M(z_{s+1})``.
The ``n x m`` state block ``y`` is advanced in place.
"""

from libc.math cimport isfinite
from libc.string cimport memcpy

import numpy as np


cdef inline void _apply(const double complex* a, const double complex* v,
                        double complex* out, Py_ssize_t n, Py_ssize_t m) noexcept nogil:
    # out = -1j * a @ v for row-major a (n x n) and v (n x m); real arithmetic
    # avoids the slow NaN-aware complex multiply
    cdef Py_ssize_t i, j, c
    cdef double ar, ai, vr, vi
    cdef double* row
    cdef const double* vrow
    cdef const double* ad = <const double*> a
    for i in range(n):
        row = <double*> (out + i * m)
        for c in range(2 * m):
            row[c] = 0.0
        for j in range(n):
            # -1j * (x + iy) = y - ix
            ar = ad[2 * (i * n + j) + 1]
            ai = -ad[2 * (i * n + j)]
            if ar == 0.0 and ai == 0.0:
                continue
            vrow = <const double*> (v + j * m)
            for c in range(m):
                vr = vrow[2 * c]
                vi = vrow[2 * c + 1]
                row[2 * c] += ar * vr - ai * vi
                row[2 * c + 1] += ar * vi + ai * vr


cdef inline void _axpy(double complex* out, const double complex* x, double s,
                       const double complex* k, Py_ssize_t size) noexcept nogil:
    # out = x + s * k with a real scalar
    cdef Py_ssize_t i
    cdef double* o = <double*> out
    cdef const double* xd = <const double*> x
    cdef const double* kd = <const double*> k
    for i in range(2 * size):
        o[i] = xd[i] + s * kd[i]


def rk4_steps(const double complex[:, :, ::1] mats, double complex[:, ::1] y,
              double h, Py_ssize_t stride, double complex[:, :, ::1] out):
    """Advance ``y`` through ``(mats.shape[0] - 1) // 2`` steps.

    After every ``stride`` steps the state is copied into the next slot of
    ``out``. Returns the number of steps completed; fewer than requested
    means the state became non-finite during the step that followed.
    """
    cdef Py_ssize_t nsteps = (mats.shape[0] - 1) // 2
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t m = y.shape[1]
    cdef Py_ssize_t size = n * m
    cdef Py_ssize_t s, i, slot = 0
    cdef Py_ssize_t nn = n * n
    cdef double half = 0.5 * h
    cdef double sixth = h / 6.0
    cdef bint ok = True
    cdef double* yd
    if size == 0 or nsteps == 0:
        return nsteps
    cdef double complex[::1] work = np.empty(5 * size, dtype=np.complex128)
    cdef double complex* yp = &y[0, 0]
    cdef const double complex* mp = &mats[0, 0, 0]
    cdef double complex* tmp = &work[0]
    cdef double complex* k1 = tmp + size
    cdef double complex* k2 = k1 + size
    cdef double complex* k3 = k2 + size
    cdef double complex* k4 = k3 + size

    with nogil:
        for s in range(nsteps):
            _apply(mp + 2 * s * nn, yp, k1, n, m)
            _axpy(tmp, yp, half, k1, size)
            _apply(mp + (2 * s + 1) * nn, tmp, k2, n, m)
            _axpy(tmp, yp, half, k2, size)
            _apply(mp + (2 * s + 1) * nn, tmp, k3, n, m)
            _axpy(tmp, yp, h, k3, size)
            _apply(mp + (2 * s + 2) * nn, tmp, k4, n, m)
            yd = <double*> yp
            for i in range(2 * size):
                yd[i] += sixth * ((<double*> k1)[i] + 2 * (<double*> k2)[i] + 2 * (<double*> k3)[i] + (<double*> k4)[i])
                if not isfinite(yd[i]):
                    ok = False
            if not ok:
                break
            if (s + 1) % stride == 0:
                memcpy(&out[slot, 0, 0], yp, size * sizeof(double complex))
                slot += 1
    return s if not ok else nsteps
