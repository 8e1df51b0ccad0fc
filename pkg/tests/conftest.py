import numpy as np
import pytest

from brtomo.geometry import Circle, Scene


@pytest.fixture
def unit_scene():
    return Scene(Circle((0.0, 0.0), 1.0), Circle((0.0, 0.0), 0.5))


@pytest.fixture
def desk_scene():
    return Scene(Circle((0.5, 0.5), 0.5), Circle((0.5, 0.5), 0.125))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
