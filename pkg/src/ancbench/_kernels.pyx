# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled block kernels (see ``_kernels_py`` for the contract)."""
from libc.math cimport isfinite
from libc.stdlib cimport malloc, free

cdef enum:
    OK = 0
    DIVERGED = 1
    BREAKDOWN = 2


cdef inline void _push(double[::1] taps, Py_ssize_t n_taps, double sample) noexcept nogil:
    cdef Py_ssize_t k
    for k in range(n_taps - 1, 0, -1):
        taps[k] = taps[k - 1]
    taps[0] = sample


def lms_block(const double[::1] desired, const double[::1] reference,
              double[::1] w, double[::1] taps, double mu,
              double[::1] out_y, double[::1] out_e):
    cdef Py_ssize_t n_taps = w.shape[0]
    cdef Py_ssize_t length = desired.shape[0]
    cdef Py_ssize_t n, k
    cdef double y, e, g
    cdef int status = OK
    cdef Py_ssize_t where = -1
    cdef bint bad
    with nogil:
        for n in range(length):
            _push(taps, n_taps, reference[n])
            y = 0.0
            for k in range(n_taps):
                y += taps[k] * w[k]
            e = desired[n] - y
            out_y[n] = y
            out_e[n] = e
            g = mu * e
            bad = False
            for k in range(n_taps):
                w[k] += g * taps[k]
                if not isfinite(w[k]):
                    bad = True
            if bad:
                status = DIVERGED
                where = n
                break
    return status, where


def nlms_block(const double[::1] desired, const double[::1] reference,
               double[::1] w, double[::1] taps, double mu, double eps,
               double[::1] out_y, double[::1] out_e):
    cdef Py_ssize_t n_taps = w.shape[0]
    cdef Py_ssize_t length = desired.shape[0]
    cdef Py_ssize_t n, k
    cdef double y, e, g, power
    cdef int status = OK
    cdef Py_ssize_t where = -1
    cdef bint bad
    with nogil:
        for n in range(length):
            _push(taps, n_taps, reference[n])
            y = 0.0
            power = 0.0
            for k in range(n_taps):
                y += taps[k] * w[k]
                power += taps[k] * taps[k]
            e = desired[n] - y
            out_y[n] = y
            out_e[n] = e
            g = mu * e / (power + eps)
            bad = False
            for k in range(n_taps):
                w[k] += g * taps[k]
                if not isfinite(w[k]):
                    bad = True
            if bad:
                status = DIVERGED
                where = n
                break
    return status, where


def rls_block(const double[::1] desired, const double[::1] reference,
              double[::1] w, double[::1] taps, double[:, ::1] P,
              double[::1] gain, double forgetting,
              double[::1] out_y, double[::1] out_e):
    cdef Py_ssize_t n_taps = w.shape[0]
    cdef Py_ssize_t length = desired.shape[0]
    cdef Py_ssize_t n, i, j
    cdef double y, e, s, den, a, b, v
    cdef double m = forgetting
    cdef int status = OK
    cdef Py_ssize_t where = -1
    cdef bint bad
    cdef double *pu = <double *> malloc(n_taps * sizeof(double))
    if pu == NULL:
        raise MemoryError()
    try:
        with nogil:
            for n in range(length):
                _push(taps, n_taps, reference[n])
                y = 0.0
                for i in range(n_taps):
                    y += taps[i] * w[i]
                e = desired[n] - y
                out_y[n] = y
                out_e[n] = e

                den = m
                for i in range(n_taps):
                    s = 0.0
                    for j in range(n_taps):
                        s += P[i, j] * taps[j]
                    pu[i] = s
                    den += taps[i] * s
                if not (den > 0.0 and isfinite(den)):
                    status = BREAKDOWN
                    where = n
                    break
                for i in range(n_taps):
                    gain[i] = pu[i] / den

                bad = False
                for i in range(n_taps):
                    w[i] += e * gain[i]
                    if not isfinite(w[i]):
                        bad = True
                if bad:
                    status = DIVERGED
                    where = n
                    break

                for i in range(n_taps):
                    for j in range(i, n_taps):
                        a = (P[i, j] - gain[i] * pu[j]) / m
                        b = (P[j, i] - gain[j] * pu[i]) / m
                        v = (a + b) * 0.5
                        if not isfinite(v):
                            bad = True
                        P[i, j] = v
                        P[j, i] = v
                if bad:
                    status = BREAKDOWN
                    where = n
                    break
    finally:
        free(pu)
    return status, where
