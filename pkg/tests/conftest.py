import itertools

import numpy as np
import pytest


class StubRng:
    """Stands in for a numpy Generator; `random` replays fixed values in a cycle."""

    def __init__(self, *values):
        self._values = itertools.cycle(values or (0.0,))
        self.calls = 0

    def random(self, size=None):
        self.calls += 1
        if size is None:
            return next(self._values)
        shape = (size,) if np.ndim(size) == 0 else tuple(size)
        return np.array([next(self._values) for _ in range(int(np.prod(shape)))]).reshape(shape)


@pytest.fixture
def stub_rng():
    return StubRng


# one line per acceptance criterion, echoed at the end of the session
CRITERIA_LINES: list[str] = []


@pytest.fixture(scope="session")
def criterion_log():
    return CRITERIA_LINES


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA_LINES:
            terminalreporter.write_line(line)
