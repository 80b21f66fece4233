# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled adaptive Simpson kernel; same contract as ``_simpson_py``."""

import numpy as np

from libc.math cimport cos, sin, fabs, sqrt, ceil

DEF MAX_DEPTH = 60

cdef int OK = 0
cdef int TOO_MANY_INTERVALS = 1
cdef int DEPTH_EXCEEDED = 2


cdef inline void _eval(double complex[::1] amps, double[::1] freqs, double x,
                       double complex[::1] out) noexcept nogil:
    cdef Py_ssize_t j
    cdef double ph
    for j in range(amps.shape[0]):
        ph = freqs[j] * x
        out[j] = amps[j] * (cos(ph) - 1j * sin(ph))


cdef inline double _cabs(double complex z) noexcept nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


def adaptive_simpson_phases(amps_in, freqs_in, double a, double b, double tol, long max_intervals):
    cdef double complex[::1] amps = np.ascontiguousarray(amps_in, dtype=complex)
    cdef double[::1] freqs = np.ascontiguousarray(freqs_in, dtype=float)
    cdef Py_ssize_t n = amps.shape[0]
    total_arr = np.zeros(n, dtype=complex)
    errv_arr = np.zeros(n)
    cdef double complex[::1] total = total_arr
    cdef double[::1] errv = errv_arr
    cdef double width = b - a
    if n == 0 or width == 0.0:
        return total_arr, 0.0, 0, OK

    # stack slots: 0 fa, 1 fm, 2 fb, 3 whole
    cdef double complex[:, :, ::1] st = np.empty((MAX_DEPTH + 2, 4, n), dtype=complex)
    cdef double[::1] sa = np.empty(MAX_DEPTH + 2)
    cdef double[::1] sb = np.empty(MAX_DEPTH + 2)
    cdef double complex[::1] flm = np.empty(n, dtype=complex)
    cdef double complex[::1] frm = np.empty(n, dtype=complex)
    cdef double complex[::1] left = np.empty(n, dtype=complex)
    cdef double complex[::1] right = np.empty(n, dtype=complex)
    cdef double complex[::1] diff = np.empty(n, dtype=complex)

    cdef double wmax = 0.0
    cdef Py_ssize_t j
    for j in range(n):
        if fabs(freqs[j]) > wmax:
            wmax = fabs(freqs[j])
    cdef long panels = <long>ceil(wmax * width)
    if panels < 4:
        panels = 4

    cdef double per_unit = tol / width
    cdef long leaves = 0
    cdef long p
    cdef int top, status = OK
    cdef double pa, pb, x0, x1, m, h, emax, e, maxerr
    with nogil:
        for p in range(panels):
            pa = a + width * p / panels
            pb = a + width * (p + 1) / panels
            top = 0
            sa[0] = pa
            sb[0] = pb
            _eval(amps, freqs, pa, st[0, 0])
            _eval(amps, freqs, pb, st[0, 2])
            _eval(amps, freqs, 0.5 * (pa + pb), st[0, 1])
            for j in range(n):
                st[0, 3, j] = (pb - pa) / 6.0 * (st[0, 0, j] + 4.0 * st[0, 1, j] + st[0, 2, j])
            while top >= 0:
                x0 = sa[top]
                x1 = sb[top]
                h = x1 - x0
                m = 0.5 * (x0 + x1)
                _eval(amps, freqs, 0.5 * (x0 + m), flm)
                _eval(amps, freqs, 0.5 * (m + x1), frm)
                emax = 0.0
                for j in range(n):
                    left[j] = h / 12.0 * (st[top, 0, j] + 4.0 * flm[j] + st[top, 1, j])
                    right[j] = h / 12.0 * (st[top, 1, j] + 4.0 * frm[j] + st[top, 2, j])
                    diff[j] = left[j] + right[j] - st[top, 3, j]
                    e = _cabs(diff[j])
                    if e > emax:
                        emax = e
                if emax / 15.0 <= per_unit * h:
                    for j in range(n):
                        total[j] = total[j] + left[j] + right[j] + diff[j] / 15.0
                        errv[j] = errv[j] + _cabs(diff[j]) / 15.0
                    leaves += 1
                    top -= 1
                    if leaves > max_intervals:
                        status = TOO_MANY_INTERVALS
                        break
                else:
                    if top + 1 > MAX_DEPTH:
                        status = DEPTH_EXCEEDED
                        break
                    # left child goes on top, right child replaces the parent
                    sa[top + 1] = x0
                    sb[top + 1] = m
                    for j in range(n):
                        st[top + 1, 0, j] = st[top, 0, j]
                        st[top + 1, 1, j] = flm[j]
                        st[top + 1, 2, j] = st[top, 1, j]
                        st[top + 1, 3, j] = left[j]
                        st[top, 0, j] = st[top, 1, j]
                        st[top, 1, j] = frm[j]
                        st[top, 3, j] = right[j]
                    sa[top] = m
                    top += 1
            if status != OK:
                break
    maxerr = 0.0
    for j in range(n):
        if errv[j] > maxerr:
            maxerr = errv[j]
    return total_arr, maxerr, leaves, status
