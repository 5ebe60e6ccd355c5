import numpy as np
import pytest

from localadaseg import BilinearProblem, generate_bilinear

ACCEPTANCE_LINES = []


@pytest.fixture
def xy_game():
    """F(x, y) = x * y over [-1, 1]^2; unique saddle at the origin."""
    return BilinearProblem(A=[[1.0]], b=[0.0], c=[0.0], sigma=0.0)


@pytest.fixture
def noisy_xy_game():
    return BilinearProblem(A=[[1.0]], b=[0.0], c=[0.0], sigma=0.1)


@pytest.fixture
def small_instance():
    return generate_bilinear(3, 0.1, 7)


@pytest.fixture
def acceptance_report():
    def report(number, passed, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {detail}")

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
