"""Memristor short-term memory and the frequency effect.

Simulate memristive devices under staircase voltage protocols, join readings
of equal dwell index into frequency slices, and measure how the hysteresis
lobe area depends on dwell time and drive frequency.
"""
from ._backend import DEFAULT_BACKEND as BACKEND
from .models import (LinearDriftModel, LinearDriftParams, RelaxationModel,
                     RelaxationModelParams, Resistor, ResistorParams, make_model)
from .simulate import SimulationError, Trace, dc_step_run, run
from .waveform import (PRESETS, WaveformSpec, build_sine, build_staircase,
                       build_triangle)

__version__ = "0.1.0"
