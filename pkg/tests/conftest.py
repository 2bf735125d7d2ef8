import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tdqo.packet import ExponentialDecay, Gaussian, auto_t0, compute_chi, make_packet
from tdqo.transforms import TimeGrid

settings.register_profile(
    "tdqo", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("tdqo")

# acceptance lines collected by test_acceptance, echoed in the summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def exp_packet():
    sh = ExponentialDecay(1.0)
    n, dt = 2**16, 1e-3
    return make_packet(sh, TimeGrid(n, dt, auto_t0(sh, n, dt)))


@pytest.fixture(scope="session")
def exp_chi(exp_packet):
    return compute_chi(exp_packet)


@pytest.fixture(scope="session")
def gauss_packet():
    return make_packet(Gaussian(1.0, 2.0), TimeGrid.centered(4096, 0.01))


@pytest.fixture(scope="session")
def gauss_chi(gauss_packet):
    return compute_chi(gauss_packet)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
