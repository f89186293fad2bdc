# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: subset scans over column sets and the conditional
inversion used by the dependent sampler."""

from libc.math cimport fabs, pow, sqrt, INFINITY
import numpy as np

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline unsigned long long _next_same_popcount(unsigned long long s) nogil:
    # Gosper's hack
    cdef unsigned long long c = s & (~s + 1)
    cdef unsigned long long r = s + c
    return (((r ^ s) >> 2) // c) | r


cdef double _kth_largest(double* buf, int m, int need) nogil:
    # partial selection, m is small
    cdef int a, b, best
    cdef double tmp
    for a in range(need):
        best = a
        for b in range(a + 1, m):
            if buf[b] > buf[best]:
                best = b
        tmp = buf[a]
        buf[a] = buf[best]
        buf[best] = tmp
    return buf[need - 1]


def tau_scan(const unsigned long long[::1] rowmask, const double[::1] rowsum,
             int d, int k, int max_card):
    cdef Py_ssize_t q = rowmask.shape[0]
    cdef double[::1] buf = np.empty(q, dtype=np.float64)
    cdef unsigned long long limit = 1ULL << d
    cdef unsigned long long s, witness = 0
    cdef int card, r, c, m
    cdef double best = -1.0, v
    for card in range(0, max_card + 1):
        if card > d:
            break
        s = (1ULL << card) - 1
        while s < limit:
            c = 0
            m = 0
            for r in range(q):
                if rowmask[r] & s:
                    c += 1
                else:
                    buf[m] = rowsum[r]
                    m += 1
            if c >= k:
                return INFINITY, True, s
            v = _kth_largest(&buf[0], m, k - c)
            if v > best:
                best = v
                witness = s
            if card == 0:
                break
            s = _next_same_popcount(s)
    return best, False, witness


def min_cover(const unsigned long long[::1] rowmask, int d, int k):
    cdef Py_ssize_t q = rowmask.shape[0]
    cdef unsigned long long limit = 1ULL << d
    cdef unsigned long long s
    cdef int card, r, c
    for card in range(1, d + 1):
        s = (1ULL << card) - 1
        while s < limit:
            c = 0
            for r in range(q):
                if rowmask[r] & s:
                    c += 1
            if c >= k:
                return card, s
            s = _next_same_popcount(s)
    return -1, 0


def cond_bisect(const double[::1] b, const double[::1] w, double rho, double tol):
    """Solve u - b u^rho (1-u) = w for u in (0, 1], elementwise.

    Newton steps kept inside a shrinking bracket; a step that would leave
    the bracket is replaced by a geometric bisection step.
    """
    cdef Py_ssize_t n = w.shape[0], j
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] res = out
    cdef double lo, hi, u, up, f, df, bj, wj, step
    cdef int it
    cdef bint unit = rho == 1.0
    with nogil:
        for j in range(n):
            bj = b[j]
            wj = w[j]
            lo = 0.5 * wj
            hi = sqrt(wj)
            if hi > 1.0:
                hi = 1.0
            u = sqrt(lo * hi)
            for it in range(200):
                up = u if unit else pow(u, rho)
                f = u - bj * up * (1.0 - u) - wj
                if f < 0:
                    lo = u
                else:
                    hi = u
                if hi - lo <= tol * lo:
                    u = 0.5 * (lo + hi)
                    break
                # derivative of the conditional distribution function
                df = 1.0 - bj * (rho * (up / u) * (1.0 - u) - up)
                step = f / df if df > 0 else 0.0
                if df > 0 and lo < u - step < hi:
                    u = u - step
                    if fabs(step) <= tol * u:
                        break
                else:
                    u = sqrt(lo * hi)
            res[j] = u
    return out
