import math

import numpy as np
import pytest

from wkaczmarz.linsys import normalize_system

SQRT_HALF = math.sqrt(0.5)


@pytest.fixture
def three_row():
    """Rows (1,0), (0,1), (1,1)/sqrt(2) with b = 0 and known solution 0."""
    return normalize_system([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], [0.0, 0.0, 0.0], solution=[0.0, 0.0])


@pytest.fixture
def identity2():
    return normalize_system(np.eye(2), np.zeros(2), solution=np.zeros(2))


def random_system(rng, m=None, n=None, with_solution=True):
    """Small seeded consistent system with a random (nonzero) solution."""
    n = n or int(rng.integers(1, 7))
    m = m or int(rng.integers(n, 13))
    A_raw = rng.standard_normal((m, n))
    x_star = rng.standard_normal(n)
    sys_ = normalize_system(A_raw, A_raw @ x_star)
    return sys_.with_solution(x_star) if with_solution else sys_


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS):
            terminalreporter.write_line(line)
