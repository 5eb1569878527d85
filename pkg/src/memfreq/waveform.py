"""Staircase and continuous voltage protocols.

A protocol is described by a :class:`LevelSequence`: the ordered voltage
levels applied to the device and the instants at which the current is read.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple


class Level(NamedTuple):
    start: float
    voltage: float
    step_index: int


class Measurement(NamedTuple):
    t: float
    step_index: int
    substep_index: int


@dataclass(frozen=True)
class WaveformSpec:
    """Staircase triangular protocol.

    Parameters
    ----------
    substeps : int
        Readings taken at each voltage level (``x``).
    dt : float
        Dwell per reading, seconds.
    dv : float
        Voltage increment, volts.
    v_max : float
        Peak voltage, volts. Must be an integer multiple of ``dv``.
    autozero_pad : float
        Hold time inserted before every reading, seconds (0 disables).
    n_total : int, optional
        Total number of readings. Derived when omitted; checked when given.
    """

    substeps: int
    dt: float
    dv: float
    v_max: float
    autozero_pad: float = 0.0
    n_total: int | None = None

    def __post_init__(self):
        if not isinstance(self.substeps, int) or self.substeps < 1:
            raise ValueError(f"substeps must be a positive integer, got {self.substeps!r}")
        for name in ("dt", "dv", "v_max"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if not (math.isfinite(self.autozero_pad) and self.autozero_pad >= 0):
            raise ValueError(f"autozero_pad must be >= 0, got {self.autozero_pad!r}")
        ratio = self.v_max / self.dv
        m = round(ratio)
        if m < 1 or abs(ratio - m) > 1e-9 * max(1.0, ratio):
            raise ValueError(f"v_max/dv must be a positive integer, got {ratio!r}")
        expected = 4 * m * self.substeps
        if self.n_total is None:
            object.__setattr__(self, "n_total", expected)
        elif self.n_total != expected:
            raise ValueError(
                f"n_total={self.n_total} inconsistent with 4*(v_max/dv)*substeps={expected}")

    @property
    def steps_per_quadrant(self) -> int:
        return round(self.v_max / self.dv)

    @property
    def n_levels(self) -> int:
        return 4 * self.steps_per_quadrant

    @property
    def period(self) -> float:
        """Interval between consecutive readings (pad plus dwell)."""
        return self.dt + self.autozero_pad

    def scaled(self, factor: float) -> WaveformSpec:
        """Same protocol with every duration multiplied by ``factor``."""
        return replace(self, dt=self.dt * factor, autozero_pad=self.autozero_pad * factor)

    def to_meta(self) -> dict[str, str]:
        return {
            "spec.kind": "staircase",
            "spec.n_total": str(self.n_total),
            "spec.substeps": str(self.substeps),
            "spec.dt": repr(self.dt),
            "spec.dv": repr(self.dv),
            "spec.v_max": repr(self.v_max),
            "spec.autozero_pad": repr(self.autozero_pad),
        }


PRESETS = {
    "peo-pani": WaveformSpec(substeps=12, dt=20.0, dv=0.1, v_max=0.9, autozero_pad=0.0),
    "tio2": WaveformSpec(substeps=10, dt=0.01, dv=0.0375, v_max=1.5, autozero_pad=0.6),
}


@dataclass(frozen=True)
class ContinuousWave:
    kind: str  # "triangle" or "sine"
    v_max: float
    omega: float
    samples_per_period: int
    n_periods: int

    def to_meta(self) -> dict[str, str]:
        return {
            "spec.kind": self.kind,
            "spec.v_max": repr(self.v_max),
            "spec.omega": repr(self.omega),
            "spec.samples_per_period": str(self.samples_per_period),
            "spec.n_periods": str(self.n_periods),
        }


@dataclass(frozen=True)
class DCStep:
    v_step: float
    hold: float
    sample_dt: float
    pre_samples: int = 4

    def to_meta(self) -> dict[str, str]:
        return {
            "spec.kind": "dc",
            "spec.v_step": repr(self.v_step),
            "spec.hold": repr(self.hold),
            "spec.sample_dt": repr(self.sample_dt),
            "spec.pre_samples": str(self.pre_samples),
        }


def spec_from_meta(meta: dict[str, str]):
    """Rebuild a protocol descriptor from ``spec.*`` metadata keys, or None."""
    kind = meta.get("spec.kind")
    if kind is None:
        return None
    if kind == "staircase":
        return WaveformSpec(
            substeps=int(meta["spec.substeps"]), dt=float(meta["spec.dt"]),
            dv=float(meta["spec.dv"]), v_max=float(meta["spec.v_max"]),
            autozero_pad=float(meta["spec.autozero_pad"]),
            n_total=int(meta["spec.n_total"]))
    if kind in ("triangle", "sine"):
        return ContinuousWave(
            kind=kind, v_max=float(meta["spec.v_max"]), omega=float(meta["spec.omega"]),
            samples_per_period=int(meta["spec.samples_per_period"]),
            n_periods=int(meta["spec.n_periods"]))
    if kind == "dc":
        return DCStep(
            v_step=float(meta["spec.v_step"]), hold=float(meta["spec.hold"]),
            sample_dt=float(meta["spec.sample_dt"]),
            pre_samples=int(meta["spec.pre_samples"]))
    raise ValueError(f"unknown protocol kind {kind!r}")


@dataclass(frozen=True)
class LevelSequence:
    levels: tuple[Level, ...]
    measurement_times: tuple[Measurement, ...]
    waveform: WaveformSpec | ContinuousWave | DCStep

    def level_voltage(self, step_index: int) -> float:
        return self.levels[step_index].voltage


def envelope(steps_per_quadrant: int) -> list[int]:
    """Level voltages in units of ``dv``: 0 -> +m -> 0 -> -m -> 0, first level +1."""
    m = steps_per_quadrant
    up = list(range(1, m + 1))
    down = list(range(m - 1, -1, -1))
    return up + down + [-k for k in up] + [-k for k in down]


def build_staircase(spec: WaveformSpec) -> LevelSequence:
    x = spec.substeps
    period = spec.period
    levels = []
    meas = []
    for k, n in enumerate(envelope(spec.steps_per_quadrant)):
        levels.append(Level(k * x * period, n * spec.dv, k))
        for j in range(1, x + 1):
            meas.append(Measurement((k * x + j) * period, k, j))
    return LevelSequence(tuple(levels), tuple(meas), spec)


def triangle_value(v_max: float, phase: float) -> float:
    """Unit-period triangle starting at 0 and rising; ``phase`` in [0, 1)."""
    if phase < 0.25:
        return v_max * (4.0 * phase)
    if phase < 0.75:
        return v_max * (2.0 - 4.0 * phase)
    return v_max * (4.0 * phase - 4.0)


def _check_continuous(v_max, omega, samples_per_period, n_periods, min_samples):
    if not (v_max > 0 and math.isfinite(v_max)):
        raise ValueError(f"v_max must be positive, got {v_max!r}")
    if not (omega > 0 and math.isfinite(omega)):
        raise ValueError(f"omega must be positive, got {omega!r}")
    if samples_per_period < min_samples:
        raise ValueError(
            f"samples_per_period must be >= {min_samples}, got {samples_per_period!r}")
    if n_periods < 1:
        raise ValueError(f"n_periods must be >= 1, got {n_periods!r}")


def _continuous(kind, v_max, omega, samples_per_period, n_periods, value):
    spp = samples_per_period
    levels = []
    meas = []
    for k in range(spp * n_periods):
        t = k / (omega * spp)
        levels.append(Level(t, value((k % spp) / spp), k))
        meas.append(Measurement(t, k, 1))
    wave = ContinuousWave(kind, v_max, omega, spp, n_periods)
    return LevelSequence(tuple(levels), tuple(meas), wave)


def build_triangle(v_max: float, omega: float, samples_per_period: int,
                   n_periods: int = 1) -> LevelSequence:
    """Sampled triangular wave of frequency ``omega`` (Hz), zero mean, rising from 0."""
    _check_continuous(v_max, omega, samples_per_period, n_periods, 8)
    return _continuous("triangle", v_max, omega, samples_per_period, n_periods,
                       lambda ph: triangle_value(v_max, ph))


def build_sine(v_max: float, omega: float, samples_per_period: int,
               n_periods: int = 1) -> LevelSequence:
    """Sampled ``v_max * sin(2*pi*omega*t)``."""
    _check_continuous(v_max, omega, samples_per_period, n_periods, 4)

    def value(ph):
        # quarter-period samples are exact; sin(pi) would leave a 1e-16 residue
        q = 4 * ph
        if q == int(q):
            return v_max * (0.0, 1.0, 0.0, -1.0)[int(q)]
        return v_max * math.sin(2.0 * math.pi * ph)

    return _continuous("sine", v_max, omega, samples_per_period, n_periods, value)


def build_dc_step(v_step: float, hold: float, sample_dt: float,
                  pre_samples: int = 4) -> LevelSequence:
    """0 V for ``pre_samples`` readings, then ``v_step`` held for ``hold`` seconds.

    The first post-step reading coincides with the step edge and sees the new
    voltage with the pre-step state.
    """
    if not (hold > 0 and sample_dt > 0):
        raise ValueError("hold and sample_dt must be positive")
    n_post = int(round(hold / sample_dt))
    if n_post < 1:
        raise ValueError("hold must span at least one sample")
    t_step = pre_samples * sample_dt
    levels = (Level(0.0, 0.0, 0), Level(t_step, float(v_step), 1))
    meas = [Measurement(k * sample_dt, 0, k + 1) for k in range(pre_samples)]
    meas += [Measurement((pre_samples + k) * sample_dt, 1, k + 1) for k in range(n_post + 1)]
    return LevelSequence(levels, tuple(meas), DCStep(float(v_step), hold, sample_dt, pre_samples))
