import pytest

from memfreq import RelaxationModel, RelaxationModelParams, WaveformSpec

TAU = 0.1


@pytest.fixture
def relax():
    return RelaxationModel()


@pytest.fixture
def scaled_peo_pani():
    """PEO-PANI staircase with dwell tau/5 per reading."""
    return WaveformSpec(substeps=12, dt=TAU / 5, dv=0.1, v_max=0.9)


def relax_with(**kw):
    return RelaxationModel(RelaxationModelParams(**kw))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
