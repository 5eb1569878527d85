"""Compiled and pure-Python integration kernels must agree."""
import numpy as np
import pytest

from memfreq import _backend, _kernels_py
from memfreq.models import LinearDriftModel, RelaxationModel, Resistor
from memfreq.simulate import run
from memfreq.waveform import WaveformSpec, build_sine, build_staircase, build_triangle

compiled = pytest.mark.skipif("cython" not in _backend.BACKENDS,
                              reason="compiled extension not built")


@compiled
@pytest.mark.parametrize("model", [RelaxationModel(), LinearDriftModel(), Resistor()])
@pytest.mark.parametrize("drive", [
    build_staircase(WaveformSpec(substeps=4, dt=0.02, dv=0.3, v_max=0.9, autozero_pad=0.01)),
    build_sine(1.0, 2.0, 16, 2),
    build_triangle(1.0, 2.0, 16, 2),
], ids=["staircase", "sine", "triangle"])
def test_backends_agree(model, drive):
    a = run(model, drive, backend="cython")
    b = run(model, drive, backend="python")
    np.testing.assert_allclose(a.i, b.i, rtol=1e-13, atol=0)


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.get_integrator("fortran")


def test_kernel_reports_blow_up():
    # w' = (g0 - w)/tau with tau < 0 grows without bound
    grid = np.linspace(0.0, 1000.0, 11)
    w, fail = _kernels_py.integrate(0, (1.0, 0.0, -1e-3, 0.0), 2.0, grid, np.zeros(10),
                                    0, 0.0, 0.0, 0.1, 0.0, np.inf, False)
    assert fail > 0 and np.isnan(w[fail])


def test_kernel_clamps_drift_state():
    grid = np.linspace(0.0, 10.0, 6)
    w, fail = _kernels_py.integrate(1, (100.0, 1000.0, 1e4, 1.0), 0.99, grid,
                                    np.full(5, 5.0), 0, 0.0, 0.0, 0.5, 0.0, 1.0, True)
    assert fail == -1 and np.all((w >= 0) & (w <= 1))


def test_triangle_kernel_matches_sampler():
    from memfreq._kernels_py import _voltage
    from memfreq.waveform import triangle_value
    for ph in np.linspace(0, 0.999, 37):
        assert _voltage(1, 0.0, 1.3, 1.0, ph) == pytest.approx(triangle_value(1.3, ph), abs=1e-15)
