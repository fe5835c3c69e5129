# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the loops in ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


def transform_sums(counts, H, G):
    cdef const double[::1] c = np.ascontiguousarray(counts, dtype=np.float64)
    cdef const double[:, ::1] h = np.ascontiguousarray(H, dtype=np.float64)
    cdef const double[:, ::1] g = np.ascontiguousarray(G, dtype=np.float64)
    cdef Py_ssize_t m = h.shape[0], d = h.shape[1], k, j
    values_arr = np.empty(m)
    left_arr = np.empty(m)
    cdef double[::1] values = values_arr
    cdef double[::1] left = left_arr
    # suffix sums B_k = sum_{j>k} c_j H_j, filled from the top
    suffix_arr = np.zeros((m + 1, d))
    cdef double[:, ::1] suf = suffix_arr
    for k in range(m - 1, -1, -1):
        for j in range(d):
            suf[k, j] = suf[k + 1, j] + c[k] * h[k, j]
    cdef double A = 0.0, hg, bg, bprev
    for k in range(m):
        hg = 0.0
        bg = 0.0
        bprev = 0.0
        for j in range(d):
            hg += h[k, j] * g[k, j]
            bg += suf[k + 1, j] * g[k, j]
            bprev += suf[k, j] * g[k, j]
        left[k] = A - bprev
        A += c[k] * (1.0 - hg)
        values[k] = A - bg
    return values_arr, left_arr


def boxcar_smooth(x_sorted, y_sorted, double a):
    cdef const double[::1] x = np.ascontiguousarray(x_sorted, dtype=np.float64)
    cdef const double[::1] y = np.ascontiguousarray(y_sorted, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], i, lo = 0, hi = 0
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    cdef double acc = 0.0
    # two-pointer sweep; window [x_i - a, x_i + a] with both ends inclusive
    for i in range(n):
        while hi < n and x[hi] <= x[i] + a:
            acc += y[hi]
            hi += 1
        while x[lo] < x[i] - a:
            acc -= y[lo]
            lo += 1
        out[i] = acc / (hi - lo)
    return out_arr


def path_abs_max(values, left_values):
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef const double[::1] lv = np.ascontiguousarray(left_values, dtype=np.float64)
    cdef Py_ssize_t i
    cdef double best = 0.0
    for i in range(v.shape[0]):
        if fabs(v[i]) > best:
            best = fabs(v[i])
    for i in range(lv.shape[0]):
        if fabs(lv[i]) > best:
            best = fabs(lv[i])
    return best


def bridge_ratio_integral(increments, double dt, keeps):
    cdef const double[::1] inc = np.ascontiguousarray(increments, dtype=np.float64)
    cdef const long long[::1] kp = np.ascontiguousarray(keeps, dtype=np.int64)
    cdef Py_ssize_t n = inc.shape[0], i, q = 0, nk = kp.shape[0]
    cdef double w1 = 0.0, w = 0.0, t, u, f, fprev = 0.0, acc = 0.0
    out_arr = np.zeros(nk)
    cdef double[::1] out = out_arr
    for i in range(n):
        w1 += inc[i]
    while q < nk and kp[q] == 0:
        q += 1
    for i in range(1, n + 1):
        if q >= nk:
            break
        w += inc[i - 1]
        t = i * dt
        u = (w - t * w1) / (1.0 - t)
        f = u * u
        acc += 0.5 * (f + fprev)
        fprev = f
        while q < nk and kp[q] == i:
            out[q] = dt * acc
            q += 1
    return out_arr
