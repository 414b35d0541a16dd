import numpy as np
import pytest

from hamexpr import hamiltonians as hm
from hamexpr.hamiltonians import Graph, ProblemClass


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def zz2():
    return hm.make_hamiltonian(np.diag([1.0, -1.0, -1.0, 1.0]), ProblemClass.RANDOM_DIAGONAL, name="zz")


@pytest.fixture
def z1():
    return hm.make_hamiltonian(np.diag([1.0, -1.0]), ProblemClass.RANDOM_DIAGONAL, name="z")


@pytest.fixture
def square():
    return Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])


def equal_up_to_phase(a, b, atol=1e-9):
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    phase = a[idx] / b[idx]
    return abs(abs(phase) - 1) < atol and np.allclose(a, phase * b, atol=atol)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
