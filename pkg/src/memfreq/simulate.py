"""Drive a state model with a protocol and record the current at each reading."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .models import StateModel
from .waveform import ContinuousWave, LevelSequence, build_dc_step

WAVE_KINDS = {"triangle": 1, "sine": 2}


class SimulationError(RuntimeError):
    """Integration produced a non-finite state."""


@dataclass
class Trace:
    """Timed ``(t, v, i)`` readings annotated with level and dwell indices.

    ``step`` and ``sub`` are None for ingested data whose level structure
    could not be recovered; such traces support DC analysis only. ``state``
    holds the model state at each reading for simulated traces (not saved).
    """

    t: np.ndarray
    v: np.ndarray
    i: np.ndarray
    step: np.ndarray | None = None
    sub: np.ndarray | None = None
    spec: object = None
    meta: dict[str, str] = field(default_factory=dict)
    state: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=np.float64)
        self.v = np.asarray(self.v, dtype=np.float64)
        self.i = np.asarray(self.i, dtype=np.float64)
        n = len(self.t)
        if len(self.v) != n or len(self.i) != n:
            raise ValueError("t, v and i must have equal length")
        if (self.step is None) != (self.sub is None):
            raise ValueError("step and sub indices must be given together")
        if self.step is not None:
            self.step = np.asarray(self.step, dtype=np.int64)
            self.sub = np.asarray(self.sub, dtype=np.int64)
            if len(self.step) != n or len(self.sub) != n:
                raise ValueError("index columns must match the sample count")

    def __len__(self):
        return len(self.t)

    @property
    def indexed(self) -> bool:
        return self.step is not None

    def validate(self):
        if len(self.t) > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("sample times must be strictly increasing")
        for name in ("t", "v", "i"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"non-finite values in column {name}")
        if self.indexed and len(self.sub) and self.sub.min() < 1:
            raise ValueError("substep indices start at 1")


def default_step(model: StateModel, drive: LevelSequence) -> float:
    """``min(reading interval, model time scale) / 100``."""
    return min(_min_dwell(drive), model.time_scale) / 100.0


def _min_dwell(drive: LevelSequence) -> float:
    times = [m.t for m in drive.measurement_times]
    gaps = np.diff(np.concatenate(([0.0], times)))
    gaps = gaps[gaps > 0]
    return float(gaps.min()) if len(gaps) else math.inf


def run(model: StateModel, drive: LevelSequence, integrator_step: float | None = None,
        *, initial_state: float | None = None, backend: str | None = None) -> Trace:
    """Integrate ``model`` under ``drive`` with fixed-step RK4.

    The state starts from the model's 0 V equilibrium at t = 0 unless
    ``initial_state`` is given. Staircase levels hold their voltage exactly;
    continuous waves are evaluated at every RK stage.

    Raises
    ------
    ValueError
        If ``integrator_step`` is not positive or exceeds a tenth of the
        shortest reading interval.
    SimulationError
        If the state becomes non-finite.
    """
    dwell = _min_dwell(drive)
    h = default_step(model, drive) if integrator_step is None else float(integrator_step)
    if not (h > 0 and math.isfinite(h)):
        raise ValueError(f"integrator_step must be positive, got {integrator_step!r}")
    if h > dwell / 10.0 * (1 + 1e-6):
        raise ValueError(
            f"integrator_step={h!r} is coarser than dwell/10 = {dwell / 10.0!r}")

    meas = drive.measurement_times
    mt = np.array([m.t for m in meas], dtype=np.float64)
    steps = np.array([m.step_index for m in meas], dtype=np.int64)
    subs = np.array([m.substep_index for m in meas], dtype=np.int64)
    level_v = np.array([lv.voltage for lv in drive.levels], dtype=np.float64)
    level_t = np.array([lv.start for lv in drive.levels], dtype=np.float64)

    # grid[0] = 0; each later node is a reading (coincident readings collapse)
    first_at_zero = len(mt) > 0 and mt[0] == 0.0
    grid = mt if first_at_zero else np.concatenate(([0.0], mt))
    active = np.searchsorted(level_t, grid[:-1], side="right") - 1
    seg_v = level_v[np.clip(active, 0, None)]
    seg_v[active < 0] = 0.0

    wave = drive.waveform
    if isinstance(wave, ContinuousWave):
        kind, amp, freq = WAVE_KINDS[wave.kind], wave.v_max, wave.omega
    else:
        kind, amp, freq = 0, 0.0, 0.0

    code, kparams, lo, hi, clamp = model.kernel
    w0 = model.initial_state() if initial_state is None else float(initial_state)
    integrate = _backend.get_integrator(backend)
    w_grid, fail = integrate(code, np.asarray(kparams, dtype=np.float64), w0, grid, seg_v,
                             kind, amp, freq, h, lo, hi, clamp)
    if fail >= 0:
        raise SimulationError(
            f"state became non-finite between t={grid[fail - 1]!r} s and t={grid[fail]!r} s")
    w = w_grid if first_at_zero else w_grid[1:]
    v = level_v[steps]
    i = np.asarray(model.current(w, v), dtype=np.float64)
    meta = {
        "model": model.name,
        "params": model.describe(),
        "integrator_step": repr(h),
        "backend": backend or _backend.DEFAULT_BACKEND,
    }
    return Trace(mt, v, i, steps, subs, spec=wave, meta=meta, state=w)


def dc_step_run(model: StateModel, v_step: float, hold: float, sample_dt: float,
                integrator_step: float | None = None, backend: str | None = None) -> Trace:
    """Step response from 0 V: four readings at 0 V, then ``v_step`` held for ``hold``."""
    if not hold > 0:
        raise ValueError("hold must be positive")
    drive = build_dc_step(v_step, hold, sample_dt)
    return run(model, drive, integrator_step, backend=backend)
