from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

SQ3 = np.sqrt(3.0)


@pytest.fixture
def two_by_two():
    """Rank-one 1x2 channel with null vector [1, sqrt 3]/2 and G = [[3, -sqrt3], [-sqrt3, 1]]/4."""
    H = np.array([[SQ3, -1.0]]) / 2
    null = np.array([1.0, SQ3]) / 2
    return H, null


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from tests_support import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
