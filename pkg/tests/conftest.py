import math

import pytest

from spinboson.model import DriveSpec, ModelParams

T_L = 50 * math.pi


@pytest.fixture
def photon_params():
    def make(g=0.2, amplitude=1.25, epsilon=0.0, rise_time=0.0):
        return ModelParams(g, epsilon, DriveSpec.photon(amplitude, rise_time))

    return make


@pytest.fixture
def atom_params():
    def make(g=0.2, amplitude=0.3, epsilon=0.0):
        return ModelParams(g, epsilon, DriveSpec.atom(amplitude))

    return make


#: PASS/FAIL lines collected by the acceptance suite, echoed in the summary.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
