import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hamexpr import hamiltonians as hm
from hamexpr.hamiltonians import Distribution, Graph, GroundKind, ProblemClass
from hamexpr.qcore import PauliString


def brute_cut(g, bits):
    return sum(bits[i] != bits[j] for i, j in g.edges)


def test_maxcut_diagonal_is_minus_cut(square):
    h = hm.maxcut(square)
    assert h.is_diagonal and h.problem_class is ProblemClass.MAXCUT
    for idx, bits in enumerate(itertools.product((0, 1), repeat=4)):
        assert h.diagonal[idx] == -brute_cut(square, bits)
    assert h.bounds == (-4.0, 0.0)


def test_vertex_cover_minimum(square):
    h = hm.min_vertex_cover(square, p=8.0)
    best = min(
        sum(bits) for bits in itertools.product((0, 1), repeat=4)
        if all(bits[i] or bits[j] for i, j in square.edges)
    )
    assert h.bounds[0] == best == 2
    idx = int(np.argmin(h.diagonal))
    bits = [(idx >> (3 - q)) & 1 for q in range(4)]
    assert all(bits[i] or bits[j] for i, j in square.edges)
    with pytest.raises(ValueError):
        hm.min_vertex_cover(square, p=0)


def test_max_clique_minimum():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3)])
    h = hm.max_clique(g)
    assert h.bounds[0] == -3.0
    assert h.diagonal[0b1110] == -3.0


def test_heisenberg_two_site_oracle():
    # n = 2 with periodic bonds counts the (0, 1) bond twice
    h = hm.heisenberg_xxz(2, 0.5, 0.0)
    xx = np.kron([[0, 1], [1, 0]], [[0, 1], [1, 0]])
    yy = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])
    zz = np.diag([1, -1, -1, 1])
    assert np.allclose(h.matrix, 2 * (xx + yy + 0.5 * zz))
    assert not h.is_diagonal


def test_heisenberg_ground_kinds():
    # strong negative field pushes the ground state to |1111>
    assert hm.heisenberg_xxz(4, 1.0, -10.0).ground_kind is GroundKind.BASIS_STATE
    assert hm.heisenberg_xxz(4, 1.0, 0.0).ground_kind is GroundKind.SUPERPOSITION
    assert hm.heisenberg_xxz(4, 1.0, 0.0).subclass.endswith(":Superposition")


def test_transverse_ising_limits():
    h = hm.transverse_ising(4, 1.0, 0.0)
    assert np.isclose(h.bounds[0], -4.0)
    h = hm.transverse_ising(4, 0.0, 2.0)
    assert np.isclose(h.bounds[0], -8.0) and h.is_diagonal


def test_adiabatic_endpoints(square):
    hp = hm.maxcut(square)
    sched = hm.ScheduleTable(np.array([0.0, 1.0]), np.array([2.0, 0.0]), np.array([0.0, 2.0]))
    h0 = hm.adiabatic(hp, 0.0, sched)
    assert np.isclose(h0.bounds[0], -4.0)  # -(A/2) sum X with A = 2
    h1 = hm.adiabatic(hp, 1.0, sched)
    assert np.allclose(h1.matrix, hp.matrix)
    with pytest.raises(ValueError):
        hm.adiabatic(hp, 1.5)


def test_schedule_validation():
    with pytest.raises(ValueError):
        hm.ScheduleTable(np.array([0.0, 0.5]), np.zeros(2), np.zeros(2))
    s = hm.bundled_schedule()
    a0, b0 = s(0.0)
    a1, b1 = s(1.0)
    assert a0 > a1 and b1 > b0


@pytest.mark.parametrize("dist", list(Distribution))
def test_random_coefficients_in_range(dist, rng):
    c = hm.sample_coefficients(dist, 5000, rng)
    assert np.all(np.abs(c) <= hm.COEFF_RANGE)
    if dist is Distribution.LOG_UNIFORM:
        assert np.all(np.abs(c) >= hm.LOG_UNIFORM_LOW)


def test_random_nondiagonal(rng):
    h = hm.random_nondiagonal(3, "Uniform", None, rng)
    assert not h.is_diagonal and len(h.params["terms"]) == 6
    assert np.isclose(np.trace(h.matrix).real, 0.0)
    with pytest.raises(ValueError):
        hm.random_nondiagonal(2, "Uniform", 16, rng)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31))
def test_spectrum_bounds_match_eigvalsh(seed):
    h = hm.random_nondiagonal(3, "TruncNormal", 5, np.random.default_rng(seed))
    w = np.linalg.eigvalsh(h.matrix)
    assert np.allclose(h.bounds, (w[0], w[-1]))


def test_spectrum_rejects_non_hermitian():
    with pytest.raises(ValueError):
        hm.spectrum_bounds(np.array([[0, 1], [0, 0]]))


def test_pauli_sum():
    m = hm.pauli_sum([PauliString("ZI", 2.0), PauliString("IX", -1.0)], 2)
    expect = 2 * np.kron(np.diag([1, -1]), np.eye(2)) - np.kron(np.eye(2), [[0, 1], [1, 0]])
    assert np.allclose(m, expect)


def test_file_roundtrips(square, rng):
    assert hm.parse_graph(hm.format_graph(square)) == square
    h = hm.random_nondiagonal(2, "Uniform", None, rng)
    h = hm.make_hamiltonian(h.matrix, h.problem_class, name="x1")
    back = hm.parse_hamiltonian(hm.format_hamiltonian(h))
    assert np.array_equal(back.matrix, h.matrix) and back.name == "x1" and back.bounds == h.bounds
