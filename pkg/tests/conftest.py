import numpy as np
import pytest

from skcprop import Scenario

ACCEPTANCE_LINES = []


def record(criterion: int, passed: bool, detail: str):
    line = f"ACCEPTANCE {criterion:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def reference_scenario():
    """P/N_X = P/N_Y = 10 dB, P/N_Z = 20 dB."""
    return Scenario(1.0, 0.1, 0.1, 0.01, wavelength=0.3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
