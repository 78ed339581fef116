import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from condmode.density import Mixture  # noqa: E402

GOLDEN_WEIGHTS = [0.45, 0.45, 0.1]
GOLDEN_CENTERS = [[1.0, 1.0], [-1.0, -1.0], [-1.5, 1.5]]
GOLDEN_BANDWIDTHS = [[1.0, 1.0], [1.0, 1.0], [0.5, 0.5]]


@pytest.fixture
def golden_mixture():
    """Three-kernel 2-D test density with two symmetric global maxima."""
    return Mixture(GOLDEN_WEIGHTS, GOLDEN_CENTERS, GOLDEN_BANDWIDTHS)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


_ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record one acceptance line; printed in the terminal summary."""

    def record(number, name, ok, detail):
        _ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number} ({name}): {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
