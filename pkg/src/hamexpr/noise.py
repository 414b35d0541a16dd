"""Four-parameter noise model (T1, T2, err1, err2) and density-matrix execution.

Every native gate is followed by thermal relaxation over its duration and a
depolarizing channel whose strength is solved so that the gate's average
infidelity equals ``err1`` (single-qubit) or ``err2`` (CX).  When relaxation
alone already exceeds the target, no depolarizing part is added.  ``rz`` is a
virtual frame change: zero duration, no error.  Measurement relaxes each qubit
for the measurement duration and then reads out through a symmetric bit flip
with probability ``err1``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .circuits import NATIVE_KINDS, CircuitTemplate, GateOp, Topology, validate_topology
from .qcore import PAULIS, DensityMatrix, target_matrix

DEFAULT_DURATIONS = {"id": 50e-9, "sx": 50e-9, "x": 50e-9, "rz": 0.0, "cx": 300e-9, "measure": 1e-6}
SINGLE_QUBIT_GATES = ("id", "rz", "sx", "x", "measure")
TWO_QUBIT_GATES = ("cx",)
NOISELESS_KINDS = frozenset({"rz"})


class NoiseModelError(ValueError):
    pass


@dataclass(frozen=True)
class KrausSet:
    operators: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.operators)
        d = ops[0].shape[0]
        total = sum(k.conj().T @ k for k in ops)
        if np.max(np.abs(total - np.eye(d))) > 1e-10:
            raise NoiseModelError("Kraus operators are not complete")
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.operators)

    def superoperator(self) -> np.ndarray:
        """Row-major vectorisation: vec(K rho K^dagger) = (K kron conj(K)) vec(rho)."""
        return sum(np.kron(k, k.conj()) for k in self.operators)

    def compose(self, first: "KrausSet") -> "KrausSet":
        """Channel applying ``first`` and then ``self``."""
        ops = [a @ b for a in self.operators for b in first.operators]
        return KrausSet(tuple(k for k in ops if np.max(np.abs(k)) > 1e-15))

    def tensor(self, other: "KrausSet") -> "KrausSet":
        return KrausSet(tuple(np.kron(a, b) for a in self.operators for b in other.operators))


def thermal_relaxation_kraus(t1: float, t2: float, duration: float) -> KrausSet:
    if duration < 0:
        raise NoiseModelError("duration must be non-negative")
    if t2 > 2 * t1:
        raise NoiseModelError(f"T2 = {t2:g} exceeds 2*T1 = {2 * t1:g}")
    if duration == 0 or math.isinf(t1):
        gamma, coherence = 0.0, (1.0 if math.isinf(t2) else math.exp(-duration / t2))
    else:
        gamma = -math.expm1(-duration / t1)
        coherence = math.exp(-duration / t2)
    # amplitude damping leaves sqrt(1 - gamma) of the coherence; dephasing supplies the rest
    ad_coherence = math.sqrt(1.0 - gamma)
    lam = coherence / ad_coherence if ad_coherence > 0 else 0.0
    lam = min(lam, 1.0)
    ops = [np.array([[1, 0], [0, ad_coherence]], dtype=complex)]
    if gamma > 0:
        ops.append(np.array([[0, math.sqrt(gamma)], [0, 0]], dtype=complex))
    if lam < 1.0:
        keep = math.sqrt((1 + lam) / 2)
        flip = math.sqrt((1 - lam) / 2)
        ops = [keep * k for k in ops] + [flip * (k @ PAULIS["Z"]) for k in ops]
    return KrausSet(tuple(ops))


def depolarizing_kraus(p: float, m_qubits: int = 1) -> KrausSet:
    if not 0.0 <= p <= 1.0 + 1e-15:
        raise NoiseModelError(f"depolarizing parameter must be in [0, 1], got {p}")
    d2 = 4**m_qubits
    ops = [math.sqrt(1 - p + p / d2) * np.eye(2**m_qubits, dtype=complex)]
    if p > 0:
        for labels in itertools.product("IXYZ", repeat=m_qubits):
            if set(labels) == {"I"}:
                continue
            ops.append(math.sqrt(p / d2) * reduce(np.kron, (PAULIS[c] for c in labels)))
    return KrausSet(tuple(ops))


def process_fidelity(ideal: np.ndarray, channel: KrausSet) -> float:
    d = ideal.shape[0]
    return float(sum(abs(np.trace(ideal.conj().T @ k)) ** 2 for k in channel.operators) / d**2)


def average_gate_fidelity(ideal: np.ndarray, channel: KrausSet) -> float:
    ideal = np.asarray(getattr(ideal, "matrix", ideal))
    d = ideal.shape[0]
    if channel.dim != d:
        raise NoiseModelError(f"channel acts on dimension {channel.dim}, gate on {d}")
    s = sum(abs(np.trace(ideal.conj().T @ k)) ** 2 for k in channel.operators)
    return float((s + d) / (d * (d + 1)))


def _depolarizing_for_target(relax: KrausSet, error: float) -> float:
    """Depolarizing strength making depol(p) o relax reach average infidelity ``error``."""
    d = relax.dim
    error = min(error, d / (d + 1))
    f_pro_relax = process_fidelity(np.eye(d), relax)
    f_pro_target = ((d + 1) * (1 - error) - 1) / d
    if f_pro_relax <= f_pro_target:
        return 0.0
    return float(min((f_pro_relax - f_pro_target) / (f_pro_relax - 1 / d**2), 1.0))


@dataclass(frozen=True)
class NoiseModel:
    t1: float
    t2: float
    err1: float
    err2: float
    gate_durations: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_DURATIONS))
    readout_error: float | None = None  # None: symmetric flip with probability err1
    readout_confusion: tuple | None = None  # optional explicit per-qubit 2x2 P(M=k | state=j)

    def __post_init__(self):
        for name in ("t1", "t2", "err1", "err2"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.t1 <= 0 or self.t2 <= 0:
            raise NoiseModelError("T1 and T2 must be positive")
        if self.t2 > 2 * self.t1:
            raise NoiseModelError(f"T2 = {self.t2:g} exceeds 2*T1")
        for name in ("err1", "err2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise NoiseModelError(f"{name} = {v} outside [0, 1]")
        if self.readout_error is not None and not 0.0 <= self.readout_error <= 1.0:
            raise NoiseModelError("readout error outside [0, 1]")
        durations = dict(DEFAULT_DURATIONS)
        durations.update({k: float(v) for k, v in self.gate_durations.items()})
        object.__setattr__(self, "gate_durations", durations)
        if self.readout_confusion is not None:
            conf = tuple(np.asarray(c, dtype=float) for c in self.readout_confusion)
            for c in conf:
                if c.shape != (2, 2) or np.any(c < 0) or np.max(np.abs(c.sum(axis=1) - 1)) > 1e-12:
                    raise NoiseModelError("confusion matrices must be 2x2 row-stochastic")
            object.__setattr__(self, "readout_confusion", conf)

    @classmethod
    def ideal(cls) -> "NoiseModel":
        return cls(math.inf, math.inf, 0.0, 0.0)

    @classmethod
    def paper_profile(cls, t1: float = 200e-6, err1: float = 1.6e-4, **kw) -> "NoiseModel":
        """T2 = T1 and err2 = 25 * err1."""
        return cls(t1, t1, err1, 25 * err1, **kw)

    @property
    def is_ideal(self) -> bool:
        return (
            math.isinf(self.t1)
            and math.isinf(self.t2)
            and self.err1 == 0
            and self.err2 == 0
            and all(np.allclose(c, np.eye(2)) for c in self.confusion_matrices(1 if self.readout_confusion is None else len(self.readout_confusion)))
        )

    def confusion_matrices(self, n_qubits: int) -> list[np.ndarray]:
        if self.readout_confusion is not None:
            if len(self.readout_confusion) < n_qubits:
                raise NoiseModelError("fewer confusion matrices than qubits")
            return list(self.readout_confusion[:n_qubits])
        q = self.err1 if self.readout_error is None else self.readout_error
        return [np.array([[1 - q, q], [q, 1 - q]]) for _ in range(n_qubits)]

    def relaxation(self, duration: float) -> KrausSet:
        return thermal_relaxation_kraus(self.t1, self.t2, duration)

    def gate_channel(self, kind: str) -> KrausSet:
        """Noise channel applied after the ideal gate (identity for virtual rz)."""
        if kind in NOISELESS_KINDS:
            return KrausSet((np.eye(2, dtype=complex),))
        duration = self.gate_durations[kind]
        relax = self.relaxation(duration)
        if kind == "measure":
            return relax
        if kind in TWO_QUBIT_GATES:
            relax = relax.tensor(relax)
            error, m = self.err2, 2
        else:
            error, m = self.err1, 1
        p = _depolarizing_for_target(relax, error)
        return depolarizing_kraus(p, m).compose(relax) if p > 0 else relax

    def with_durations(self, **durations) -> "NoiseModel":
        merged = dict(self.gate_durations)
        merged.update(durations)
        return NoiseModel(self.t1, self.t2, self.err1, self.err2, merged, self.readout_error, self.readout_confusion)

    # ---- file format -------------------------------------------------------

    @classmethod
    def parse(cls, text: str) -> "NoiseModel":
        values, durations = None, {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "noise":
                values = {k: float(v) for k, v in (p.split("=", 1) for p in parts[1:])}
            elif parts[0] == "duration" and len(parts) == 3:
                durations[parts[1]] = float(parts[2])
            else:
                raise NoiseModelError(f"cannot parse noise line {line!r}")
        if values is None:
            raise NoiseModelError("missing 'noise t1=... t2=... err1=... err2=...' line")
        try:
            return cls(values["t1"], values["t2"], values["err1"], values["err2"], durations)
        except KeyError as exc:
            raise NoiseModelError(f"noise line missing {exc}") from None

    @classmethod
    def load(cls, path: str | Path) -> "NoiseModel":
        return cls.parse(Path(path).read_text())

    def format(self) -> str:
        lines = [f"noise t1={self.t1!r} t2={self.t2!r} err1={self.err1!r} err2={self.err2!r}"]
        lines += [f"duration {k} {v!r}" for k, v in sorted(self.gate_durations.items())]
        return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------- #
# error-rate metric
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class ErrorRateReport:
    eta: float
    delta: float
    err_total: float
    per_gate: dict


_IDEAL_MATRIX = {"measure": np.eye(2, dtype=complex)}


def _ideal(kind: str) -> np.ndarray:
    if kind in _IDEAL_MATRIX:
        return _IDEAL_MATRIX[kind]
    if kind == "cx":
        return np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    return target_matrix(kind, 0.0)


def gate_accuracy(
    model: NoiseModel,
    topo: Topology,
    gateset: tuple[Sequence[str], Sequence[str]] = (SINGLE_QUBIT_GATES, TWO_QUBIT_GATES),
) -> tuple[float, dict]:
    """Average gate accuracy over every (gate, qubit) and (gate, edge) slot.

    The noisy gate is the ideal unitary followed by the noise channel, so its
    fidelity against the ideal unitary equals the channel's fidelity against
    the identity.
    """
    g1, g2 = gateset
    if not g1 and not g2:
        raise NoiseModelError("empty gate set")
    per_gate = {}
    for kind in g1:
        f = average_gate_fidelity(np.eye(2), model.gate_channel(kind))
        for q in range(topo.n_qubits):
            per_gate[(kind, (q,))] = f
    for kind in g2:
        f = average_gate_fidelity(np.eye(4), model.gate_channel(kind))
        # each orientation is its own slot; our channel is symmetric, so both share f
        for i, j in sorted(topo.edges):
            per_gate[(kind, (i, j))] = f
            per_gate[(kind, (j, i))] = f
    eta = math.fsum(per_gate.values()) / len(per_gate)
    return eta, per_gate


def measurement_accuracy(model: NoiseModel, n_qubits: int) -> float:
    return float(np.prod([0.5 * (c[0, 0] + c[1, 1]) for c in model.confusion_matrices(n_qubits)]))


def error_rate(
    model: NoiseModel,
    topo: Topology,
    gateset: tuple[Sequence[str], Sequence[str]] = (SINGLE_QUBIT_GATES, TWO_QUBIT_GATES),
    n_qubits: int | None = None,
) -> ErrorRateReport:
    n = topo.n_qubits if n_qubits is None else n_qubits
    eta, per_gate = gate_accuracy(model, topo, gateset)
    delta = measurement_accuracy(model, n)
    return ErrorRateReport(eta, delta, 1.0 - eta * delta, per_gate)


# --------------------------------------------------------------------------- #
# density-matrix execution
# --------------------------------------------------------------------------- #


def _apply_super(rho: np.ndarray, n: int, sup: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Apply a superoperator on ``qubits`` to rho given as a (2,)*2n tensor."""
    m = len(qubits)
    axes = list(qubits) + [n + q for q in qubits]
    moved = np.moveaxis(rho, axes, range(2 * m))
    shape = moved.shape
    out = (sup @ moved.reshape(4**m, -1)).reshape(shape)
    return np.moveaxis(out, range(2 * m), axes)


def _unitary_super(u: np.ndarray) -> np.ndarray:
    return np.kron(u, u.conj())


class NoisySimulator:
    """Density-matrix executor for native circuits under a :class:`NoiseModel`."""

    def __init__(self, model: NoiseModel, n_qubits: int, topology: Topology | None = None):
        self.model = model
        self.n = n_qubits
        self.topology = topology
        self._noise = {}
        for kind in ("id", "sx", "x", "cx"):
            ch = model.gate_channel(kind)
            self._noise[kind] = None if ch.dim and len(ch.operators) == 1 and np.allclose(ch.operators[0], np.eye(ch.dim)) else ch.superoperator()
        self._fixed = {}
        for kind in ("id", "sx", "x"):
            sup = _unitary_super(target_matrix(kind))
            noise = self._noise[kind]
            self._fixed[kind] = sup if noise is None else noise @ sup
        cx_sup = _unitary_super(_ideal("cx"))
        self._fixed["cx"] = cx_sup if self._noise["cx"] is None else self._noise["cx"] @ cx_sup
        relax = model.gate_channel("measure")
        self._measure = relax.superoperator()
        self._confusion = model.confusion_matrices(n_qubits)
        # with at most one nonzero per Kraus row, outcome probabilities depend on diag(rho)
        # only, and the measurement relaxation folds into the readout matrices
        self._readout = None
        if all(np.count_nonzero(np.abs(k) > 0, axis=1).max() <= 1 for k in relax.operators):
            transfer = sum(np.abs(k.T) ** 2 for k in relax.operators)
            self._readout = [transfer @ c for c in self._confusion]

    def check(self, template: CircuitTemplate):
        bad = [g.kind for g in template.gates if g.kind not in NATIVE_KINDS]
        if bad:
            raise NoiseModelError(f"non-native gates {sorted(set(bad))}; decompose first")
        if self.topology is not None:
            violations = validate_topology(template, self.topology)
            if violations:
                v = violations[0]
                raise NoiseModelError(
                    f"{len(violations)} gate(s) violate the topology, first {v.kind}{v.qubits} at index {v.gate_index}"
                )

    def initial(self) -> np.ndarray:
        d = 2**self.n
        rho = np.zeros((d, d), dtype=complex)
        rho[0, 0] = 1.0
        return rho.reshape((2,) * (2 * self.n))

    def _gate_super(self, g: GateOp, params) -> np.ndarray:
        if g.kind == "rz":
            ph = np.exp(-1j * g.resolve(params))
            # diagonal phase on the row axis, conjugate on the column axis
            return np.diag([1.0, ph, np.conj(ph), 1.0])
        return self._fixed[g.kind]

    def apply_gates(self, rho: np.ndarray, gates, params) -> np.ndarray:
        n = self.n
        # runs of single-qubit maps are multiplied out and applied when a two-qubit
        # gate touches the qubit (maps on different qubits commute)
        pending: dict[int, np.ndarray] = {}

        def flush(q):
            sup = pending.pop(q, None)
            if sup is not None:
                return _apply_super(rho, n, sup, (q,))
            return rho

        for g in gates:
            sup = self._gate_super(g, params)
            if len(g.qubits) == 1:
                q = g.qubits[0]
                prev = pending.get(q)
                pending[q] = sup if prev is None else sup @ prev
            else:
                for q in g.qubits:
                    rho = flush(q)
                rho = _apply_super(rho, n, sup, g.qubits)
        for q in sorted(pending):
            rho = flush(q)
        return rho

    def run(self, template: CircuitTemplate, params) -> np.ndarray:
        """Final density matrix (before measurement) as a d x d array."""
        self.check(template)
        d = 2**self.n
        params = np.asarray(params, dtype=float)
        return self.apply_gates(self.initial(), template.gates, params).reshape(d, d)

    def measured_distribution(self, rho: np.ndarray) -> np.ndarray:
        """Outcome probabilities including measurement relaxation and readout flips."""
        n = self.n
        d = 2**n
        if self._readout is not None:
            p = np.clip(np.diagonal(np.asarray(rho).reshape(d, d)).real, 0.0, None)
            return apply_confusion(p, self._readout)
        t = np.asarray(rho).reshape((2,) * (2 * n))
        for q in range(n):
            t = _apply_super(t, n, self._measure, (q,))
        p = np.clip(np.diagonal(t.reshape(d, d)).real, 0.0, None)
        return apply_confusion(p, self._confusion)


def apply_confusion(p: np.ndarray, confusion: Sequence[np.ndarray]) -> np.ndarray:
    """Push a basis-state distribution through independent per-qubit readout errors."""
    n = len(confusion)
    t = np.asarray(p, dtype=float).reshape((2,) * n)
    for q, c in enumerate(confusion):
        # c[j, k] = P(M = k | state = j)
        t = np.moveaxis(np.tensordot(c.T, t, axes=([1], [q])), 0, q)
    out = t.reshape(-1)
    out = np.clip(out, 0.0, None)
    return out / out.sum()


def noisy_execute(
    template: CircuitTemplate,
    params,
    model: NoiseModel,
    topo: Topology | None,
    rng: np.random.Generator | None = None,
) -> DensityMatrix:
    """Run a native circuit from |0...0> with every gate followed by its noise channel.

    All channels are deterministic Kraus maps, so ``rng`` is not consumed.
    """
    sim = NoisySimulator(model, template.n_qubits, topo)
    rho = sim.run(template, params)
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho, template.n_qubits)


def measure_counts(
    rho: DensityMatrix, model: NoiseModel, n_shots: int, rng: np.random.Generator
) -> dict[str, int]:
    """Sample bitstrings after measurement relaxation and the readout confusion."""
    if n_shots < 1:
        raise ValueError("n_shots must be >= 1")
    n = rho.n_qubits
    p = NoisySimulator(model, n).measured_distribution(rho.matrix)
    counts = rng.multinomial(n_shots, p)
    return {format(i, f"0{n}b"): int(c) for i, c in enumerate(counts) if c}
