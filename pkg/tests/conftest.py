import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from becbound import builtin_code, generate_random
from becbound.decoder import peel

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=400, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def sweep_code(seed: int):
    """Seeded sweep code: n in [6, 10], mixed check degrees."""
    n = 6 + seed % 5
    m = max(3, n // 2 + seed % 3)
    return generate_random(n, m, seed)


def truth_table(g, target: int) -> np.ndarray:
    return np.array([target in peel(g, p) for p in range(1 << g.n)], dtype=bool)


@pytest.fixture(scope="session")
def fig1():
    return builtin_code("fig1")


@pytest.fixture(scope="session")
def hamming():
    return builtin_code("hamming74")


@pytest.fixture(scope="session")
def golay():
    return builtin_code("golay23")


# criterion number -> (status, title); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, title = ACCEPTANCE[n]
        terminalreporter.write_line(f"{status} criterion {n}: {title}")
