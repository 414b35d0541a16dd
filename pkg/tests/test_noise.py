import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hamexpr import noise as nz
from hamexpr.circuits import CircuitTemplate, GateOp, Topology, build_template, decompose_to_native
from hamexpr.noise import NoiseModel, NoiseModelError
from hamexpr.qcore import Statevector, apply_circuit

PAPER = NoiseModel.paper_profile()
LINE4 = Topology.line(4)


def is_state(rho, atol=1e-10):
    w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    return abs(np.trace(rho) - 1) < atol and np.allclose(rho, rho.conj().T, atol=atol) and w.min() > -atol


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-6, 1e-3), st.floats(0.05, 2.0), st.floats(0, 2e-6))
def test_thermal_relaxation_oracle(t1, ratio, t):
    t2 = min(ratio * t1, 2 * t1)
    ch = nz.thermal_relaxation_kraus(t1, t2, t)
    one = ch.apply(np.diag([0, 1]).astype(complex))
    assert math.isclose(one[1, 1].real, math.exp(-t / t1), rel_tol=1e-9, abs_tol=1e-12)
    plus = ch.apply(np.full((2, 2), 0.5, dtype=complex))
    assert math.isclose(plus[0, 1].real, 0.5 * math.exp(-t / t2), rel_tol=1e-9, abs_tol=1e-12)


def test_thermal_relaxation_limits():
    assert nz.thermal_relaxation_kraus(math.inf, math.inf, 1e-6).operators[0] == pytest.approx(np.eye(2))
    with pytest.raises(NoiseModelError):
        nz.thermal_relaxation_kraus(1e-4, 3e-4, 1e-7)
    with pytest.raises(NoiseModelError):
        nz.thermal_relaxation_kraus(1e-4, 1e-4, -1)


@pytest.mark.parametrize("m", [1, 2])
@pytest.mark.parametrize("p", [0.0, 0.01, 0.3, 1.0])
def test_depolarizing_oracle(m, p, rng):
    d = 2**m
    ch = nz.depolarizing_kraus(p, m)
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    psi /= np.linalg.norm(psi)
    rho = np.outer(psi, psi.conj())
    assert np.allclose(ch.apply(rho), (1 - p) * rho + p * np.eye(d) / d)
    assert math.isclose(nz.average_gate_fidelity(np.eye(d), ch), 1 - p * (d - 1) / d, rel_tol=1e-12)


def test_average_gate_fidelity_of_unitary_error():
    # coherent over-rotation Rz(t): F = (|Tr Rz|^2 + d) / (d (d + 1)) = (4 cos^2(t/2) + 2) / 6
    t = 0.2
    ch = nz.KrausSet((np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)]),))
    assert math.isclose(nz.average_gate_fidelity(np.eye(2), ch), (4 * math.cos(t / 2) ** 2 + 2) / 6)


def test_kraus_completeness_checked():
    with pytest.raises(NoiseModelError):
        nz.KrausSet((0.5 * np.eye(2),))


def test_superoperator_matches_apply(rng):
    ch = PAPER.gate_channel("sx")
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    rho = a @ a.conj().T
    rho /= np.trace(rho)
    assert np.allclose((ch.superoperator() @ rho.reshape(-1)).reshape(2, 2), ch.apply(rho))


@pytest.mark.parametrize("kind,target", [("sx", 1.6e-4), ("x", 1.6e-4), ("id", 1.6e-4), ("cx", 4e-3)])
def test_gate_channels_hit_target_infidelity(kind, target):
    d = 4 if kind == "cx" else 2
    assert math.isclose(1 - nz.average_gate_fidelity(np.eye(d), PAPER.gate_channel(kind)), target, rel_tol=1e-9)


def test_relaxation_alone_when_it_exceeds_target():
    m = NoiseModel(1e-6, 1e-6, 1e-6, 1e-6)
    relax = m.relaxation(m.gate_durations["sx"])
    assert nz._depolarizing_for_target(relax, 1e-6) == 0.0
    assert len(m.gate_channel("sx").operators) == len(relax.operators)


def test_rz_is_virtual_and_measure_relaxes_only():
    assert np.allclose(PAPER.gate_channel("rz").operators[0], np.eye(2))
    meas = PAPER.gate_channel("measure")
    expect = 1 - nz.average_gate_fidelity(np.eye(2), PAPER.relaxation(1e-6))
    assert math.isclose(1 - nz.average_gate_fidelity(np.eye(2), meas), expect)


def test_error_rate_ideal_is_exactly_zero():
    r = nz.error_rate(NoiseModel.ideal(), LINE4)
    assert r.err_total == 0.0 and r.eta == 1.0 and r.delta == 1.0


def test_error_rate_paper_profile():
    r = nz.error_rate(PAPER, LINE4)
    assert 1.6e-3 <= r.err_total <= 6.6e-3
    assert math.isclose(r.delta, (1 - 1.6e-4) ** 4)
    # 5 single-qubit kinds on 4 qubits and cx on both orientations of 3 edges
    assert len(r.per_gate) == 5 * 4 + 2 * 3
    assert ("cx", (1, 0)) in r.per_gate and ("cx", (0, 1)) in r.per_gate
    assert math.isclose(r.err_total, 1 - r.eta * r.delta)


def test_error_rate_increases_with_noise():
    errs = [nz.error_rate(NoiseModel.paper_profile(err1=e), LINE4).err_total for e in (1e-5, 1e-4, 1e-3)]
    assert errs == sorted(errs) and errs[0] < errs[-1]
    with pytest.raises(NoiseModelError):
        nz.gate_accuracy(PAPER, LINE4, ((), ()))


def test_model_validation():
    with pytest.raises(NoiseModelError):
        NoiseModel(1e-4, 3e-4, 0, 0)
    with pytest.raises(NoiseModelError):
        NoiseModel(1e-4, 1e-4, 1.5, 0)
    with pytest.raises(NoiseModelError):
        NoiseModel(-1, 1e-4, 0, 0)
    assert NoiseModel.ideal().is_ideal and not PAPER.is_ideal


def test_noise_file_roundtrip(tmp_path):
    m = PAPER.with_durations(cx=4e-7)
    path = tmp_path / "dev.noise"
    path.write_text(m.format())
    assert NoiseModel.load(path) == m
    with pytest.raises(NoiseModelError):
        NoiseModel.parse("duration cx 1e-7\n")
    with pytest.raises(NoiseModelError):
        NoiseModel.parse("noise t1=1e-4 t2=1e-4 err1=0\n")


def test_confusion():
    p = nz.apply_confusion(np.array([1.0, 0, 0, 0]), NoiseModel(1, 1, 0.1, 0).confusion_matrices(2))
    assert np.allclose(p, [0.81, 0.09, 0.09, 0.01])
    with pytest.raises(NoiseModelError):
        NoiseModel(1, 1, 0, 0, readout_confusion=([[0.5, 0.6], [0, 1]],))


def test_ideal_simulator_matches_statevector(rng):
    t = decompose_to_native(build_template("circuit_05", 4, 1))
    params = rng.uniform(0, 2 * np.pi, t.param_count)
    rho = nz.noisy_execute(t, params, NoiseModel.ideal(), None)
    psi = apply_circuit(t, params, Statevector.zero(4)).amplitudes
    assert np.allclose(rho.matrix, np.outer(psi, psi.conj()), atol=1e-10)


def test_noisy_simulator_output_is_a_state(rng):
    t = decompose_to_native(build_template("circuit_02", 4, 2))
    params = rng.uniform(0, 2 * np.pi, t.param_count)
    sim = nz.NoisySimulator(PAPER, 4, LINE4)
    rho = sim.run(t, params)
    assert is_state(rho)
    p = sim.measured_distribution(rho)
    assert math.isclose(p.sum(), 1.0) and p.min() >= 0
    psi = apply_circuit(t, params, Statevector.zero(4)).amplitudes
    assert np.vdot(psi, rho @ psi).real > 0.8


def test_single_gate_noise_oracle():
    # one noisy X from |0>: thermal relaxation then depolarizing acting on |1><1|
    t = CircuitTemplate.from_gates([GateOp("x", (0,))], 1)
    m = NoiseModel(1e-4, 1e-4, 1e-3, 0.0)
    rho = nz.NoisySimulator(m, 1).run(t, [])
    relax = m.relaxation(50e-9)
    p = nz._depolarizing_for_target(relax, 1e-3)
    after = relax.apply(np.diag([0, 1]).astype(complex))
    expect = (1 - p) * after + p * np.eye(2) / 2
    assert np.allclose(rho, expect)


def test_simulator_rejects_bad_circuits():
    sim = nz.NoisySimulator(PAPER, 4, LINE4)
    with pytest.raises(NoiseModelError, match="non-native"):
        sim.run(build_template("rx_only", 4), np.zeros(4))
    bad = CircuitTemplate.from_gates([GateOp("cx", (0, 3))], 4)
    with pytest.raises(NoiseModelError, match="topology"):
        sim.run(bad, [])


def test_measure_counts(rng):
    rho = nz.noisy_execute(CircuitTemplate.from_gates([GateOp("x", (0,))], 2), [], NoiseModel.ideal(), None)
    assert nz.measure_counts(rho, NoiseModel.ideal(), 100, rng) == {"10": 100}
    counts = nz.measure_counts(rho, NoiseModel(1, 1, 0.2, 0), 20000, rng)
    assert sum(counts.values()) == 20000
    assert abs(counts["00"] / 20000 - 0.16) < 0.015


def test_folded_readout_matches_superoperator_path(rng):
    sim = nz.NoisySimulator(PAPER.with_durations(measure=2e-5), 3)
    assert sim._readout is not None
    t = decompose_to_native(build_template("hea_linear", 3, 2))
    rho = sim.run(t, rng.uniform(0, 2 * np.pi, t.param_count))
    fast = sim.measured_distribution(rho)
    sim._readout = None
    assert np.allclose(fast, sim.measured_distribution(rho), atol=1e-14)
