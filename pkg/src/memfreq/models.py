"""Memristive state models.

Each model is a state equation ``dw/dt = f(w, v)`` plus an output equation
``i = g(w, v)``. The relaxation model is the default: a single conductance
that relaxes towards a voltage-dependent equilibrium with time constant tau,
which produces a current spike on every voltage step followed by a monotone
decay. The linear-drift model and the plain resistor serve as references.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import _kernels_py as _k


def _require_finite(*values):
    for value in values:
        if not math.isfinite(value):
            raise ValueError(f"non-finite input {value!r}")


@dataclass(frozen=True)
class ModelState:
    w: float
    t: float = 0.0


@dataclass(frozen=True)
class RelaxationModelParams:
    g_zero: float = 2e-6
    beta: float = 2.0
    tau: float = 0.1

    def __post_init__(self):
        _require_finite(self.g_zero, self.beta, self.tau)
        if self.g_zero <= 0 or self.beta < 0 or self.tau <= 0:
            raise ValueError(f"invalid relaxation parameters {self}")


@dataclass(frozen=True)
class LinearDriftParams:
    r_on: float = 100.0
    r_off: float = 16e3
    mobility: float = 10.0
    width_norm: float = 0.1
    window_power: int = 1

    def __post_init__(self):
        _require_finite(self.r_on, self.r_off, self.mobility, self.width_norm)
        if not 0 < self.r_on < self.r_off:
            raise ValueError("need 0 < r_on < r_off")
        if not 0 <= self.width_norm <= 1:
            raise ValueError("width_norm must lie in [0, 1]")
        if self.mobility <= 0:
            raise ValueError("mobility must be positive")
        if int(self.window_power) != self.window_power or self.window_power < 1:
            raise ValueError("window_power must be an integer >= 1")
        object.__setattr__(self, "window_power", int(self.window_power))


@dataclass(frozen=True)
class ResistorParams:
    r: float = 1e3

    def __post_init__(self):
        _require_finite(self.r)
        if self.r <= 0:
            raise ValueError("r must be positive")


# relaxation model

def relax_equilibrium(params: RelaxationModelParams, v: float) -> float:
    """Equilibrium conductance ``g_zero / (1 + beta*|v|)``."""
    return params.g_zero / (1.0 + params.beta * abs(v))


def relax_derivative(params: RelaxationModelParams, state: ModelState, v: float) -> float:
    _require_finite(state.w, v)
    return (relax_equilibrium(params, v) - state.w) / params.tau


def relax_current(state: ModelState, v: float) -> float:
    _require_finite(state.w, v)
    return state.w * v


def relax_step_closed_form(params: RelaxationModelParams, v: float, w0: float,
                           t: float) -> float:
    """Exact current ``t`` seconds after ``v`` is applied to a device at state ``w0``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    weq = relax_equilibrium(params, v)
    return v * (weq + (w0 - weq) * math.exp(-t / params.tau))


# linear drift model

def drift_window(w: float, p: int) -> float:
    return 1.0 - (2.0 * w - 1.0) ** (2 * p)


def drift_current(params: LinearDriftParams, state: ModelState, v: float) -> float:
    w = state.w
    return v / (params.r_on * w + params.r_off * (1.0 - w))


def drift_derivative(params: LinearDriftParams, state: ModelState, v: float) -> float:
    # the current is normalised by 1/r_on so that mobility carries units 1/(V*s)
    i = drift_current(params, state, v)
    return params.mobility * params.r_on * i * drift_window(state.w, params.window_power)


def resistor_current(r: float, v: float) -> float:
    return v / r


class StateModel:
    """Common surface used by the simulator.

    Subclasses provide the Python-level derivative and current, the vectorised
    current used when assembling traces, and a ``kernel`` tuple
    ``(code, params4, lo, hi, clamp)`` consumed by the integration backends.
    """

    name: str
    params: object

    def initial_state(self) -> float:
        raise NotImplementedError

    def derivative(self, w: float, v: float) -> float:
        raise NotImplementedError

    def current(self, w, v):
        raise NotImplementedError

    @property
    def time_scale(self) -> float:
        """Characteristic memory time, seconds; sets the default integrator step."""
        raise NotImplementedError

    @property
    def kernel(self):
        raise NotImplementedError

    def describe(self) -> str:
        vals = ",".join(f"{f.name}={getattr(self.params, f.name)!r}" for f in fields(self.params))
        return f"{self.name}({vals})"

    def __repr__(self):
        return self.describe()


class RelaxationModel(StateModel):
    name = "relax"

    def __init__(self, params: RelaxationModelParams | None = None):
        self.params = params or RelaxationModelParams()

    def initial_state(self):
        return self.params.g_zero

    def equilibrium(self, v):
        return self.params.g_zero / (1.0 + self.params.beta * np.abs(v))

    def derivative(self, w, v):
        return relax_derivative(self.params, ModelState(w), v)

    def current(self, w, v):
        return np.multiply(w, v)

    @property
    def time_scale(self):
        return self.params.tau

    @property
    def kernel(self):
        p = self.params
        return _k.MODEL_RELAX, (p.g_zero, p.beta, p.tau, 0.0), 0.0, math.inf, False


class LinearDriftModel(StateModel):
    name = "drift"

    def __init__(self, params: LinearDriftParams | None = None):
        self.params = params or LinearDriftParams()

    def initial_state(self):
        return self.params.width_norm

    def derivative(self, w, v):
        return drift_derivative(self.params, ModelState(w), v)

    def current(self, w, v):
        p = self.params
        w = np.asarray(w, dtype=float)
        return np.divide(v, p.r_on * w + p.r_off * (1.0 - w))

    @property
    def time_scale(self):
        # width sweep time under 1 V at the OFF resistance (the slow end)
        p = self.params
        return p.r_off / (p.mobility * p.r_on)

    @property
    def kernel(self):
        p = self.params
        return (_k.MODEL_DRIFT, (p.r_on, p.r_off, p.mobility, float(p.window_power)),
                0.0, 1.0, True)


class Resistor(StateModel):
    name = "resistor"

    def __init__(self, params: ResistorParams | None = None):
        self.params = params or ResistorParams()

    def initial_state(self):
        return 0.0

    def derivative(self, w, v):
        return 0.0

    def current(self, w, v):
        return np.divide(v, self.params.r)

    @property
    def time_scale(self):
        return 1.0

    @property
    def kernel(self):
        return _k.MODEL_RESISTOR, (0.0, 0.0, 0.0, 0.0), 0.0, 0.0, False


MODELS = {
    "relax": (RelaxationModel, RelaxationModelParams),
    "drift": (LinearDriftModel, LinearDriftParams),
    "resistor": (Resistor, ResistorParams),
}


def make_model(name: str, params: dict | None = None) -> StateModel:
    """Instantiate a model by name from a flat ``{parameter: number}`` mapping."""
    try:
        cls, pcls = MODELS[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(MODELS)}") from None
    params = dict(params or {})
    known = {f.name for f in fields(pcls)}
    unknown = sorted(set(params) - known)
    if unknown:
        raise ValueError(f"unknown parameter(s) for {name}: {', '.join(unknown)}")
    for key, value in params.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError(f"parameter {key} must be a number, got {value!r}")
    return cls(pcls(**params))


def load_params(path: str | Path) -> dict:
    """Read a flat JSON object of numeric model parameters."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: parameter file must be a JSON object")
    return data
