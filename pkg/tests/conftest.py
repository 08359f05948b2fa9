import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from spectral_gate import Potential, certify

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

small_floats = st.floats(-0.3, 0.3, allow_nan=False)


@st.composite
def short_potentials(draw, max_len=8, amp=0.3):
    vals = draw(st.lists(st.floats(-amp, amp, allow_nan=False), min_size=1, max_size=max_len))
    return Potential(vals)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def certified_random():
    """Deterministic pool of short certified potentials."""
    from spectral_gate.verify import random_certified
    return random_certified(40, seed=7, N=2000)


def certified_at(V, N=2000):
    return certify(V, N).certified


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
