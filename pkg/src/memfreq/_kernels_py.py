"""Pure-Python fixed-step RK4 kernel.

Mirrors ``_kernels.pyx`` operation for operation so that both backends
produce the same floating-point results.
"""
import math

import numpy as np

MODEL_RELAX = 0
MODEL_DRIFT = 1
MODEL_RESISTOR = 2

WAVE_STEPS = 0
WAVE_TRIANGLE = 1
WAVE_SINE = 2


def _derivative(model, p0, p1, p2, p3, w, v):
    if model == MODEL_RELAX:
        weq = p0 / (1.0 + p1 * math.fabs(v))
        return (weq - w) / p2
    if model == MODEL_DRIFT:
        r = p0 * w + p1 * (1.0 - w)
        s = 2.0 * w - 1.0
        window = 1.0 - math.pow(s, 2.0 * p3)
        return p2 * p0 * (v / r) * window
    return 0.0


def _voltage(kind, seg_v, amp, freq, t):
    if kind == WAVE_STEPS:
        return seg_v
    if kind == WAVE_TRIANGLE:
        ph = t * freq
        ph = ph - math.floor(ph)
        if ph < 0.25:
            return amp * (4.0 * ph)
        if ph < 0.75:
            return amp * (2.0 - 4.0 * ph)
        return amp * (4.0 * ph - 4.0)
    return amp * math.sin(2.0 * math.pi * freq * t)


def integrate(model, params, w0, grid, seg_v, wave_kind, amp, freq, h_max,
              w_lo, w_hi, clamp):
    """Advance the state across ``grid`` and return it at every grid time.

    Returns ``(w, fail)`` where ``fail`` is the index of the first grid
    interval in which the state became non-finite, or -1.
    """
    p0, p1, p2, p3 = (float(p) for p in params)
    grid = [float(t) for t in grid]
    seg_v = [float(v) for v in seg_v]
    n = len(grid)
    out = np.empty(n, dtype=np.float64)
    w = float(w0)
    out[0] = w
    for k in range(1, n):
        ta = grid[k - 1]
        span = grid[k] - ta
        nsub = int(math.ceil(span / h_max - 1e-9))
        if nsub < 1:
            nsub = 1
        hs = span / nsub
        half = 0.5 * hs
        sv = seg_v[k - 1]
        for j in range(nsub):
            t = ta + j * hs
            va = _voltage(wave_kind, sv, amp, freq, t)
            vm = _voltage(wave_kind, sv, amp, freq, t + half)
            vb = _voltage(wave_kind, sv, amp, freq, t + hs)
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
        if not math.isfinite(w):
            out[k:] = np.nan
            return out, k
        out[k] = w
    return out, -1
