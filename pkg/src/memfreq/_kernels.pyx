# cython: language_level=3
"""Compiled fixed-step RK4 kernel; see ``_kernels_py`` for the reference."""
import numpy as np

from libc.math cimport fabs, pow, floor, sin, ceil, isfinite, M_PI


cdef inline double _derivative(int model, double p0, double p1, double p2,
                               double p3, double w, double v) noexcept nogil:
    cdef double weq, r, s, window
    if model == 0:
        weq = p0 / (1.0 + p1 * fabs(v))
        return (weq - w) / p2
    if model == 1:
        r = p0 * w + p1 * (1.0 - w)
        s = 2.0 * w - 1.0
        window = 1.0 - pow(s, 2.0 * p3)
        return p2 * p0 * (v / r) * window
    return 0.0


cdef inline double _voltage(int kind, double seg_v, double amp, double freq,
                            double t) noexcept nogil:
    cdef double ph
    if kind == 0:
        return seg_v
    if kind == 1:
        ph = t * freq
        ph = ph - floor(ph)
        if ph < 0.25:
            return amp * (4.0 * ph)
        if ph < 0.75:
            return amp * (2.0 - 4.0 * ph)
        return amp * (4.0 * ph - 4.0)
    return amp * sin(2.0 * M_PI * freq * t)


def integrate(int model, params, double w0, grid, seg_v, int wave_kind,
              double amp, double freq, double h_max, double w_lo, double w_hi,
              bint clamp):
    cdef double[::1] g = np.ascontiguousarray(grid, dtype=np.float64)
    cdef double[::1] sv = np.ascontiguousarray(seg_v, dtype=np.float64)
    cdef double[::1] pr = np.ascontiguousarray(params, dtype=np.float64)
    cdef Py_ssize_t n = g.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double p0 = pr[0], p1 = pr[1], p2 = pr[2], p3 = pr[3]
    cdef double w = w0, ta, span, hs, half, t, va, vm, vb, k1, k2, k3, k4, v
    cdef Py_ssize_t k, j, nsub, fail = -1
    out[0] = w
    with nogil:
        for k in range(1, n):
            ta = g[k - 1]
            span = g[k] - ta
            nsub = <Py_ssize_t>ceil(span / h_max - 1e-9)
            if nsub < 1:
                nsub = 1
            hs = span / nsub
            half = 0.5 * hs
            v = sv[k - 1]
            for j in range(nsub):
                t = ta + j * hs
                va = _voltage(wave_kind, v, amp, freq, t)
                vm = _voltage(wave_kind, v, amp, freq, t + half)
                vb = _voltage(wave_kind, v, amp, freq, t + hs)
                k1 = _derivative(model, p0, p1, p2, p3, w, va)
                k2 = _derivative(model, p0, p1, p2, p3, w + half * k1, vm)
                k3 = _derivative(model, p0, p1, p2, p3, w + half * k2, vm)
                k4 = _derivative(model, p0, p1, p2, p3, w + hs * k3, vb)
                w = w + hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                if clamp:
                    if w < w_lo:
                        w = w_lo
                    elif w > w_hi:
                        w = w_hi
            if not isfinite(w):
                fail = k
                break
            out[k] = w
    if fail >= 0:
        out_arr[fail:] = np.nan
    return out_arr, fail
