"""Frequency slices, lobe areas, DC step features and frequency sweeps."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .models import StateModel
from .simulate import Trace, run
from .waveform import WaveformSpec, build_sine

log = logging.getLogger(__name__)

# zero-H threshold relative to v_max * max|i|
ZERO_REL = 1e-9


class AnalysisError(ValueError):
    pass


@dataclass
class FrequencySlice:
    """Readings sharing dwell index ``substep_index``, one per level, in drive order.

    ``omega_ratio`` is the slice frequency in units of 1/(N*dt), exactly 1/x.
    """

    substep_index: int
    omega: float
    points: np.ndarray  # shape (n_levels, 2): columns v, i
    omega_ratio: Fraction = Fraction(1)

    @property
    def v(self):
        return self.points[:, 0]

    @property
    def i(self):
        return self.points[:, 1]


@dataclass
class DCFeatures:
    i_max: float
    t_peak: float
    i_inf: float
    tau_inf: float
    epsilon: float


@dataclass
class SliceHysteresis:
    x: int
    omega: float
    area_pos: float
    area_neg: float
    H: float
    pinch_current: float | None
    closed_by_segment: bool


@dataclass
class HysteresisReport:
    slices: list[SliceHysteresis]
    pinch_current: float | None
    monotone_in_x: bool
    fit_conductance: float
    fit_resistance: float | None
    fit_residual: float


@dataclass
class SweepPoint:
    omega: float
    H: float
    H_previous: float
    settled: bool
    settle_periods: int = 0


@dataclass
class SweepReport:
    points: list[SweepPoint]
    omega_zero: float | None
    omega_star: float | None
    fingerprint_2: bool
    fingerprint_3: bool
    unsettled: list[float] = field(default_factory=list)


def _staircase_shape(trace: Trace):
    if not trace.indexed:
        raise AnalysisError("trace has no level/dwell indexing; slices unavailable")
    steps = np.unique(trace.step)
    x = int(trace.sub.max())
    for s in steps:
        subs = trace.sub[trace.step == s]
        if len(subs) != x or not np.array_equal(np.sort(subs), np.arange(1, x + 1)):
            missing = sorted(set(range(1, x + 1)) - set(subs.tolist()))
            raise AnalysisError(
                f"level {int(s)} does not carry dwell indices 1..{x} (missing {missing})")
    return x, len(steps)


def extract_slices(trace: Trace) -> list[FrequencySlice]:
    """Join readings of equal dwell index into one I-V curve per index.

    Slice ``x`` is assigned ``omega = 1 / (x * N * dt)`` with N the number of
    readings and dt the per-reading dwell.
    """
    spec = trace.spec
    if spec is not None and not isinstance(spec, WaveformSpec):
        raise AnalysisError(f"slices need a staircase trace, got {type(spec).__name__}")
    x, _ = _staircase_shape(trace)
    if spec is not None:
        n, dt = spec.n_total, spec.dt
    else:
        n, dt = len(trace), float(np.median(np.diff(trace.t)))
    order = np.lexsort((trace.t, trace.step))
    out = []
    for k in range(1, x + 1):
        sel = order[trace.sub[order] == k]
        pts = np.column_stack((trace.v[sel], trace.i[sel]))
        out.append(FrequencySlice(k, 1.0 / (k * n * dt), pts, Fraction(1, k)))
    return out


def _with_crossings(v, i):
    """Closed loop with linearly interpolated points inserted at v = 0 crossings."""
    vv, ii = [], []
    n = len(v)
    for k in range(n):
        a, b = k, (k + 1) % n
        vv.append(v[a])
        ii.append(i[a])
        if v[a] * v[b] < 0:
            f = v[a] / (v[a] - v[b])
            vv.append(0.0)
            ii.append(i[a] + f * (i[b] - i[a]))
    return np.array(vv), np.array(ii)


def lobe_signed_areas(points) -> list[tuple[int, float]]:
    """Signed shoelace area of every lobe as ``(side, area)``, side = +1 or -1.

    The sequence is treated as a closed loop (last point joined to first).
    Lobes are delimited at v = 0 crossings, located by linear interpolation.
    Edges lying on the axis contribute nothing because the shoelace terms
    vanish there, so the lobe areas sum to the signed area of the whole loop.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise AnalysisError("lobe_areas needs at least 3 (v, i) points")
    v, i = _with_crossings(pts[:, 0], pts[:, 1])
    n = len(v)
    nxt = np.roll(np.arange(n), -1)
    cross = v * i[nxt] - v[nxt] * i
    side = np.sign(v + v[nxt]).astype(int)
    # start at a side change so no lobe straddles the wrap-around
    start = next((k for k in range(n) if side[k] != side[k - 1]), 0)
    lobes = []
    acc, cur = 0.0, 0
    for k in list(range(start, n)) + list(range(start)):
        if side[k] != cur:
            if cur:
                lobes.append((int(cur), float(acc / 2.0)))
            acc, cur = 0.0, side[k]
        acc += cross[k]
    if cur:
        lobes.append((int(cur), float(acc / 2.0)))
    return lobes


def lobe_areas(points) -> tuple[float, float]:
    """Summed absolute lobe areas on the positive and negative voltage sides."""
    lobes = lobe_signed_areas(points)
    area_pos = sum(abs(a) for s, a in lobes if s > 0)
    area_neg = sum(abs(a) for s, a in lobes if s < 0)
    return float(area_pos), float(area_neg)


def signed_area(points) -> float:
    pts = np.asarray(points, dtype=np.float64)
    v, i = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(v * np.roll(i, -1) - np.roll(v, -1) * i))


def pinch_current(points) -> float | None:
    """Largest |i| among the loop's v = 0 crossings, or None if it never crosses."""
    pts = np.asarray(points, dtype=np.float64)
    v, i = pts[:, 0], pts[:, 1]
    n = len(v)
    found = []
    for k in range(n):
        b = (k + 1) % n
        if v[k] == 0.0:
            found.append(abs(i[k]))
        elif v[k] * v[b] < 0:
            f = v[k] / (v[k] - v[b])
            found.append(abs(i[k] + f * (i[b] - i[k])))
    return max(found) if found else None


def pinch_metrics(slices: list[FrequencySlice]) -> list[float | None]:
    return [pinch_current(s.points) for s in slices]


def origin_fit(v, i) -> tuple[float, float]:
    """Least-squares conductance of ``i = g*v`` and the RMS residual current."""
    v = np.asarray(v, dtype=np.float64)
    i = np.asarray(i, dtype=np.float64)
    den = float(np.dot(v, v))
    g = float(np.dot(v, i)) / den if den > 0 else 0.0
    resid = float(np.sqrt(np.mean((i - g * v) ** 2)))
    return g, resid


def _scale(v, i):
    return float(np.max(np.abs(v)) * np.max(np.abs(i))) if len(v) else 0.0


def hysteresis_report(slices: list[FrequencySlice]) -> HysteresisReport:
    """Per-slice lobe areas, monotonicity in dwell index, and the ohmic-limit fit.

    ``monotone_in_x`` allows increases up to ``ZERO_REL * v_max * max|i|`` so
    that numerically zero loops count as flat.
    """
    if len(slices) < 2:
        raise AnalysisError(f"need at least 2 slices, got {len(slices)}")
    recs = []
    scale = 0.0
    for s in slices:
        if len(s.points) < 3:
            raise AnalysisError(f"slice x={s.substep_index} has fewer than 3 points")
        ap, an = lobe_areas(s.points)
        closed = not np.array_equal(s.points[0], s.points[-1])
        recs.append(SliceHysteresis(s.substep_index, s.omega, ap, an, ap + an,
                                    pinch_current(s.points), closed))
        scale = max(scale, _scale(s.v, s.i))
    recs.sort(key=lambda r: r.x)
    tol = ZERO_REL * scale
    monotone = all(b.H <= a.H + tol for a, b in zip(recs, recs[1:]))
    slowest = max(slices, key=lambda s: s.substep_index)
    g, resid = origin_fit(slowest.v, slowest.i)
    pinches = [r.pinch_current for r in recs if r.pinch_current is not None]
    return HysteresisReport(
        slices=recs,
        pinch_current=max(pinches) if pinches else None,
        monotone_in_x=monotone,
        fit_conductance=g,
        fit_resistance=1.0 / g if g != 0 else None,
        fit_residual=resid,
    )


def _post_step(trace: Trace):
    """Readings from the final voltage step onwards."""
    if trace.indexed:
        sel = trace.step == trace.step[-1]
        return trace.t[sel], trace.i[sel]
    v = trace.v
    k = len(v) - 1
    while k > 0 and v[k - 1] == v[-1]:
        k -= 1
    return trace.t[k:], trace.i[k:]


def dc_features(trace: Trace, epsilon: float = 0.01) -> DCFeatures:
    """Peak, terminal value and settling time of a single held step.

    Times are measured from the first post-step reading. ``tau_inf`` is the
    earliest reading after which ``|i - i_inf| <= epsilon * |i_max - i_inf|``
    holds for every remaining reading.
    """
    if not 0 < epsilon < 1:
        raise AnalysisError("epsilon must lie in (0, 1)")
    t, i = _post_step(trace)
    if len(t) < 3:
        raise AnalysisError(f"need at least 3 post-step readings, got {len(t)}")
    t = t - t[0]
    k_peak = int(np.argmax(np.abs(i)))
    i_max, i_inf = float(i[k_peak]), float(i[-1])
    bound = epsilon * abs(i_max - i_inf)
    inside = np.abs(i - i_inf) <= bound
    k = len(i) - 1
    while k > 0 and inside[k - 1]:
        k -= 1
    return DCFeatures(i_max, float(t[k_peak]), i_inf, float(t[k]), epsilon)


def it_slice(trace: Trace, v_level: float) -> list[np.ndarray]:
    """Current-time readings at one staircase level, one ``(t, i)`` array per visit."""
    if not trace.indexed:
        raise AnalysisError("trace has no level indexing")
    levels = np.unique(trace.v)
    spec = trace.spec
    if isinstance(spec, WaveformSpec):
        dv = spec.dv
    else:
        gaps = np.diff(levels)
        dv = float(gaps.min()) if len(gaps) else math.inf
    k = int(np.argmin(np.abs(levels - v_level)))
    if abs(levels[k] - v_level) > dv / 2:
        log.warning("no staircase level within %g V of %g V", dv / 2, v_level)
        return []
    sel = trace.v == levels[k]
    out = []
    for s in np.unique(trace.step[sel]):
        m = sel & (trace.step == s)
        out.append(np.column_stack((trace.t[m], trace.i[m])))
    return out


def _sweep_one(model, v_max, omega, spp, settle_periods, integrator_step, backend):
    drive = build_sine(v_max, omega, spp, settle_periods + 1)
    h = integrator_step
    if h is None:
        h = min(1.0 / (omega * spp) / 10.0, model.time_scale / 100.0)
    trace = run(model, drive, h, backend=backend)
    last = np.column_stack((trace.v[-spp:], trace.i[-spp:]))
    prev = np.column_stack((trace.v[-2 * spp:-spp], trace.i[-2 * spp:-spp]))
    return sum(lobe_areas(last)), sum(lobe_areas(prev)), _scale(trace.v, trace.i)


def frequency_sweep(model: StateModel, v_max: float, omegas, samples_per_period: int = 64,
                    settle_periods: int = 8, integrator_step: float | None = None,
                    workers: int = 1, backend: str | None = None,
                    min_settle_time: float | None = None) -> SweepReport:
    """Hysteresis versus sine-drive frequency ``omegas`` (Hz).

    Each frequency starts from the 0 V equilibrium, discards
    ``max(settle_periods, ceil(min_settle_time * omega))`` periods and takes H
    from the following period. ``min_settle_time`` defaults to ten model time
    scales so that fast drives still reach their steady cycle. A frequency is
    flagged unsettled when H of the last two periods differs by more than 1%.
    The default integrator step is ``min(sample interval / 10, time scale / 100)``.
    """
    omegas = [float(w) for w in omegas]
    if len(omegas) < 5:
        raise AnalysisError(f"a sweep needs at least 5 frequencies, got {len(omegas)}")
    if any(b <= a for a, b in zip(omegas, omegas[1:])):
        raise AnalysisError("frequencies must be strictly ascending")
    if settle_periods < 1:
        raise AnalysisError("settle_periods must be >= 1")

    if min_settle_time is None:
        min_settle_time = 10.0 * model.time_scale
    n_settle = {w: max(settle_periods, math.ceil(min_settle_time * w - 1e-9)) for w in omegas}

    def job(w):
        return _sweep_one(model, v_max, w, samples_per_period, n_settle[w],
                          integrator_step, backend)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(job, omegas))
    else:
        results = [job(w) for w in omegas]

    scale = max(r[2] for r in results)
    points = []
    for w, (h_last, h_prev, _) in sorted(zip(omegas, results)):
        ref = max(abs(h_last), ZERO_REL * scale)
        settled = abs(h_last - h_prev) <= 0.01 * ref
        points.append(SweepPoint(w, h_last, h_prev, settled, n_settle[w]))
    return sweep_verdicts(points, scale)


def sweep_verdicts(points: list[SweepPoint], scale: float) -> SweepReport:
    """Locate the hysteresis maximum and the onset of monotone decrease."""
    hs = np.array([p.H for p in points])
    unsettled = [p.omega for p in points if not p.settled]
    if len(hs) == 0 or hs.max() <= ZERO_REL * scale:
        return SweepReport(points, None, None, False, True, unsettled)
    k0 = int(np.argmax(hs))
    tail = len(hs) - 1
    while tail > 0 and hs[tail] <= hs[tail - 1]:
        tail -= 1
    k_star = max(k0, tail)
    omega_star = points[k_star].omega
    # a monotone tail needs at least one decreasing interval to mean anything
    fp2 = k_star < len(hs) - 1
    fp3 = bool(hs[-1] <= 0.05 * hs[k0])
    return SweepReport(points, points[k0].omega, omega_star if fp2 else None, fp2, fp3,
                       unsettled)
