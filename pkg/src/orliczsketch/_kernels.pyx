# cython: language_level=3
"""Compiled kernels: CountSketch accumulation and Orlicz norm root finding.

Mirrors ``_kernels_py`` call for call.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, pow, log1p

cnp.import_array()

DEF POWER = 0
DEF HUBER = 1
DEF L1L2 = 2
DEF FAIR = 3
DEF L15 = 4


cdef inline double log1p_gap(double u) noexcept nogil:
    # u - log(1 + u); series below 1e-2 avoids cancellation
    if u < 1e-2:
        return u * u * (0.5 - u * (1.0 / 3 - u * (0.25 - u * (0.2 - u * (
            1.0 / 6 - u * (1.0 / 7 - u / 8))))))
    return u - log1p(u)


cdef inline double g_eval(double x, int kind, double prm, double nrm,
                          double slope) noexcept nogil:
    cdef double t
    x = fabs(x)
    if x > 1.0:
        return slope * x + (1.0 - slope)
    if kind == POWER:
        return pow(x, prm)
    t = nrm * x
    if kind == HUBER:
        if t <= prm:
            return 0.5 * t * t
        return prm * (t - 0.5 * prm)
    if kind == L1L2:
        return t * t / (sqrt(1.0 + 0.5 * t * t) + 1.0)
    if kind == FAIR:
        return prm * prm * log1p_gap(t / prm)
    # L15
    if t <= prm:
        return t * sqrt(t) / 1.5
    return sqrt(prm) * (t - prm / 3.0)


cdef inline double g_deriv(double x, int kind, double prm, double nrm,
                           double slope) noexcept nogil:
    cdef double t
    x = fabs(x)
    if x >= 1.0:
        return slope
    if kind == POWER:
        if prm == 1.0:
            return 1.0
        return prm * pow(x, prm - 1.0)
    t = nrm * x
    if kind == HUBER:
        return nrm * (t if t < prm else prm)
    if kind == L1L2:
        return nrm * t / sqrt(1.0 + 0.5 * t * t)
    if kind == FAIR:
        return nrm * prm * t / (prm + t)
    return nrm * sqrt(t if t < prm else prm)


cdef double phi(const double[::1] a, double alpha, int kind, double prm,
                double nrm, double slope) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0
    cdef double inv = 1.0 / alpha
    for i in range(a.shape[0]):
        acc += g_eval(a[i] * inv, kind, prm, nrm, slope)
    return acc - 1.0


cdef double norm_impl(const double[::1] a, int kind, double prm, double nrm,
                      double slope, double rtol, int maxiter) noexcept nogil:
    cdef Py_ssize_t i
    cdef double lo = 0.0, hi = 0.0, mid, flo, fhi, fm, est
    cdef int it
    for i in range(a.shape[0]):
        if a[i] > lo:
            lo = a[i]
        hi += a[i]
    if lo == 0.0:
        return 0.0
    flo = phi(a, lo, kind, prm, nrm, slope)
    if flo <= 0.0:
        return lo
    fhi = phi(a, hi, kind, prm, nrm, slope)
    if fhi >= 0.0:
        return hi
    for it in range(maxiter):
        if hi - lo <= rtol * lo:
            break
        mid = 0.5 * (lo + hi)
        fm = phi(a, mid, kind, prm, nrm, slope)
        if fm > 0.0:
            lo = mid
            flo = fm
        elif fm < 0.0:
            hi = mid
            fhi = fm
        else:
            return mid
    est = lo + flo * (hi - lo) / (flo - fhi)
    if est < lo:
        return lo
    if est > hi:
        return hi
    return est


def orlicz_norm(x, int kind, double prm, double nrm, double slope,
                double rtol=1e-12, int maxiter=200):
    cdef const double[::1] a = np.ascontiguousarray(np.abs(x), dtype=np.float64)
    cdef double out
    with nogil:
        out = norm_impl(a, kind, prm, nrm, slope, rtol, maxiter)
    return out


def orlicz_norm_grad(r, int kind, double prm, double nrm, double slope,
                     double rtol=1e-12, int maxiter=200):
    cdef const double[::1] rv = np.ascontiguousarray(r, dtype=np.float64)
    cdef Py_ssize_t n = rv.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] absr = np.abs(np.asarray(rv))
    cdef const double[::1] a = absr
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    cdef double alpha, denom = 0.0, gp, inv
    with nogil:
        alpha = norm_impl(a, kind, prm, nrm, slope, rtol, maxiter)
        inv = 1.0 / alpha
        for i in range(n):
            gp = g_deriv(a[i] * inv, kind, prm, nrm, slope)
            out[i] = gp
            denom += gp * a[i]
        for i in range(n):
            if rv[i] > 0.0:
                out[i] = alpha * out[i] / denom
            elif rv[i] < 0.0:
                out[i] = -alpha * out[i] / denom
            else:
                out[i] = 0.0
    return alpha, out_arr


def countsketch_coo(const cnp.int64_t[::1] rows, const cnp.int64_t[::1] cols,
                    const double[::1] vals, const cnp.int64_t[::1] bucket,
                    const double[::1] weight, Py_ssize_t t, Py_ssize_t d):
    out_arr = np.zeros((t, d))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t k, i
    with nogil:
        for k in range(vals.shape[0]):
            i = rows[k]
            out[bucket[i], cols[k]] += weight[i] * vals[k]
    return out_arr


def countsketch_dense(const double[:, ::1] A, const cnp.int64_t[::1] bucket,
                      const double[::1] weight, Py_ssize_t t):
    cdef Py_ssize_t n = A.shape[0], d = A.shape[1], i, j, b
    cdef double w
    out_arr = np.zeros((t, d))
    cdef double[:, ::1] out = out_arr
    with nogil:
        for i in range(n):
            b = bucket[i]
            w = weight[i]
            for j in range(d):
                out[b, j] += w * A[i, j]
    return out_arr
