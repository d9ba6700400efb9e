import numpy as np
import pytest

from curvespec.spectral import FourierCoeffs


def random_coeffs(rng, J, scale=1.0):
    return FourierCoeffs(scale * rng.standard_normal((J + 1, 2)), scale * rng.standard_normal((J, 2)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
