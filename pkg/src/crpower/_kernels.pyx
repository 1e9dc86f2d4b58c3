# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-draw power kernels.

Same four entry points and semantics as ``crpower._kernels_py``; see that
module for the shared conventions (cap = +inf means uncapped, vanishing
denominators return the cap, zero channel gain gets zero power).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, isfinite, log2


def closed_form_power(h2, gw, double num, double a, double b, double c_eff, cap):
    """Water-filling power ``min(cap, [num/(a + b*gw) - c_eff/h2]^+)``."""
    cdef const double[::1] h2v = np.ascontiguousarray(h2, dtype=np.float64)
    cdef const double[::1] gwv = np.ascontiguousarray(gw, dtype=np.float64)
    cdef Py_ssize_t n = h2v.shape[0]
    cdef cnp.ndarray out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef const double[::1] capv = np.ascontiguousarray(
        np.broadcast_to(np.asarray(cap, dtype=np.float64), n), dtype=np.float64
    )
    cdef Py_ssize_t i
    cdef double den, p, c

    for i in range(n):
        c = capv[i]
        den = a + b * gwv[i]
        if den > 0.0:
            if h2v[i] > 0.0:
                p = num / den - c_eff / h2v[i]
                if p < 0.0:
                    p = 0.0
            else:
                p = 0.0
            out[i] = p if p < c else c
        else:
            # infinite water level; callers guarantee a finite cap exists
            out[i] = 0.0 if h2v[i] <= 0.0 else c
    return out_arr


cdef double _price(const double[:, ::1] gamma, const double[:, ::1] wts,
                   Py_ssize_t i, Py_ssize_t m, double pref, double c_eff,
                   double p) noexcept:
    cdef Py_ssize_t j
    cdef double acc = 0.0, g
    for j in range(m):
        g = gamma[i, j]
        acc += wts[i, j] * g / (c_eff + p * g)
    return pref * acc


def fixed_point_power(gamma, wts, double pref, double c_eff, rhs, cap,
                      double tol=1e-10):
    """Root of the conditional-expectation optimality equation, per draw."""
    cdef const double[:, ::1] gv = np.ascontiguousarray(gamma, dtype=np.float64)
    cdef const double[:, ::1] wv = np.ascontiguousarray(wts, dtype=np.float64)
    cdef const double[::1] rv = np.ascontiguousarray(rhs, dtype=np.float64)
    cdef Py_ssize_t n = rv.shape[0]
    cdef Py_ssize_t m = gv.shape[1]
    cdef cnp.ndarray out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef const double[::1] capv = np.ascontiguousarray(
        np.broadcast_to(np.asarray(cap, dtype=np.float64), n), dtype=np.float64
    )
    cdef Py_ssize_t i, it
    cdef double f0, lo, hi, mid, p, c

    for i in range(n):
        c = capv[i]
        if rv[i] <= 0.0:
            out[i] = c
            continue
        f0 = _price(gv, wv, i, m, pref, c_eff, 0.0)
        if not isfinite(f0):
            raise FloatingPointError("non-finite quadrature in fixed-point kernel")
        if f0 <= rv[i]:
            out[i] = 0.0
            continue
        hi = 1.0
        for it in range(200):
            if _price(gv, wv, i, m, pref, c_eff, hi) < rv[i]:
                break
            hi *= 2.0
        lo = 0.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if _price(gv, wv, i, m, pref, c_eff, mid) > rv[i]:
                lo = mid
            else:
                hi = mid
        p = 0.5 * (lo + hi)
        out[i] = p if p < c else c
    return out_arr


def rate_direct(p, h2, double c_eff):
    """Per-draw spectral terms ``log2(1 + p*h2/c_eff)``."""
    cdef const double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef const double[::1] h2v = np.ascontiguousarray(h2, dtype=np.float64)
    cdef Py_ssize_t n = pv.shape[0]
    cdef cnp.ndarray out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = log2(1.0 + pv[i] * h2v[i] / c_eff)
    return out_arr


def rate_quad(p, gamma, wts, double c_eff):
    """Per-draw quadrature of ``log2(1 + p*power/c_eff)`` against the tables."""
    cdef const double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef const double[:, ::1] gv = np.ascontiguousarray(gamma, dtype=np.float64)
    cdef const double[:, ::1] wv = np.ascontiguousarray(wts, dtype=np.float64)
    cdef Py_ssize_t n = pv.shape[0]
    cdef Py_ssize_t m = gv.shape[1]
    cdef cnp.ndarray out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(n):
        acc = 0.0
        for j in range(m):
            acc += wv[i, j] * log2(1.0 + pv[i] * gv[i, j] / c_eff)
        out[i] = acc
    return out_arr
