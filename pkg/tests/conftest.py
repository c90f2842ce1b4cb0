import numpy as np
import pytest

from dqgtlab.hamiltonians import LandauZener, TwoLevel
from dqgtlab.protocols import lz_optimal

_ACCEPTANCE_LINES = []


def record_acceptance(label: str, ok: bool, detail: str = ""):
    line = f"{'PASS' if ok else 'FAIL'} {label}" + (f" :: {detail}" if detail else "")
    _ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def lz():
    return LandauZener(2.0)


@pytest.fixture(scope="session")
def lz_opt():
    return lz_optimal(10.0)


@pytest.fixture(scope="session")
def two_level():
    return TwoLevel()
