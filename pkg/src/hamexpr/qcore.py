"""Dense statevector / density-matrix primitives for small registers.

Qubit 0 is the most significant bit of a basis-state index, so ``|q0 q1 ... q_{n-1}>``
maps to index ``q0 * 2**(n-1) + ... + q_{n-1}``.  Every module in the package uses
this ordering.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import TYPE_CHECKING, Sequence

import numpy as np

if TYPE_CHECKING:
    from .circuits import CircuitTemplate
    from .hamiltonians import Hamiltonian

MAX_QUBITS = 8
ATOL = 1e-10


class DimensionError(ValueError):
    """Raised when register sizes or matrix dimensions do not agree."""


# --------------------------------------------------------------------------- #
# single-qubit matrices
# --------------------------------------------------------------------------- #

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H_GATE = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
SX = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex)

PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex)


_FIXED_1Q = {"id": I2, "x": X, "sx": SX, "h": H_GATE}
_ROT_1Q = {"rx": rx, "ry": ry, "rz": rz}
# controlled gates: kind -> target operator (fixed matrix or rotation factory)
_CONTROLLED = {"cx": X, "cz": Z, "crx": rx, "crz": rz}


def target_matrix(kind: str, angle: float | None = None) -> np.ndarray:
    """2x2 matrix acted on the target qubit (for controlled kinds: the controlled block)."""
    if kind in _FIXED_1Q:
        return _FIXED_1Q[kind]
    if kind in _ROT_1Q:
        return _ROT_1Q[kind](angle)
    if kind in _CONTROLLED:
        op = _CONTROLLED[kind]
        return op(angle) if callable(op) else op
    raise ValueError(f"unknown gate kind {kind!r}")


# --------------------------------------------------------------------------- #
# value types
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class Statevector:
    amplitudes: np.ndarray
    n_qubits: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.n_qubits,):
            raise DimensionError(f"expected {2**self.n_qubits} amplitudes, got {amps.shape}")
        if abs(np.vdot(amps, amps).real - 1.0) > ATOL:
            raise ValueError("statevector is not normalised")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, n_qubits: int) -> "Statevector":
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(amps, n_qubits)

    @classmethod
    def basis(cls, bits: str | int, n_qubits: int | None = None) -> "Statevector":
        """``basis("01")`` is |01>, i.e. qubit 0 in |0> and qubit 1 in |1>."""
        if isinstance(bits, str):
            n_qubits = len(bits)
            bits = int(bits, 2)
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[bits] = 1.0
        return cls(amps, n_qubits)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    n_qubits: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = 2**self.n_qubits
        if m.shape != (d, d):
            raise DimensionError(f"expected {d}x{d} density matrix, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > ATOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-9:
            raise ValueError("density matrix trace differs from 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_statevector(cls, psi: Statevector) -> "DensityMatrix":
        a = psi.amplitudes
        return cls(np.outer(a, a.conj()), psi.n_qubits)

    def probabilities(self) -> np.ndarray:
        return np.clip(np.diag(self.matrix).real, 0.0, None)


@dataclass(frozen=True)
class UnitaryMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"unitary must be square, got {m.shape}")
        if unitarity_error(m) > ATOL:
            raise ValueError("matrix is not unitary")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class PauliString:
    ops: str
    coefficient: float = 1.0

    def __post_init__(self):
        if not self.ops or set(self.ops) - set("IXYZ"):
            raise ValueError(f"invalid Pauli string {self.ops!r}")
        if not np.isfinite(self.coefficient):
            raise ValueError("Pauli coefficient must be finite")

    @property
    def n_qubits(self) -> int:
        return len(self.ops)

    @property
    def is_identity(self) -> bool:
        return set(self.ops) == {"I"}


def unitarity_error(m: np.ndarray) -> float:
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


# --------------------------------------------------------------------------- #
# operations
# --------------------------------------------------------------------------- #


def haar_unitary(n_qubits: int, rng: np.random.Generator) -> UnitaryMatrix:
    """Haar-distributed unitary on ``n_qubits`` (Ginibre + QR with phase fix)."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise DimensionError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    return UnitaryMatrix(haar_unitaries(2**n_qubits, 1, rng)[0])


def haar_unitaries(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Stack of ``count`` Haar unitaries of size ``dim``; shape (count, dim, dim)."""
    z = rng.standard_normal((count, dim, dim)) + 1j * rng.standard_normal((count, dim, dim))
    q, r = np.linalg.qr(z / np.sqrt(2))
    diag = np.diagonal(r, axis1=1, axis2=2)
    phases = diag / np.abs(diag)
    return q * phases[:, None, :]


def _check_binding(template: "CircuitTemplate", params) -> np.ndarray:
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.size != template.param_count:
        raise DimensionError(
            f"template {template.template_id!r} takes {template.param_count} parameters, got {params.size}"
        )
    return params


def apply_gate(tensor: np.ndarray, n_qubits: int, kind: str, qubits: Sequence[int], angle) -> np.ndarray:
    """Apply one gate to a tensor whose first ``n_qubits`` axes are qubit axes.

    Extra trailing axes (columns of a matrix, say) ride along untouched.
    """
    u = target_matrix(kind, angle)
    if len(qubits) == 1:
        (q,) = qubits
        out = np.tensordot(u, tensor, axes=([1], [q]))
        return np.moveaxis(out, 0, q)
    ctrl, tgt = qubits
    out = tensor.copy()
    sel = [slice(None)] * tensor.ndim
    sel[ctrl] = 1
    sel = tuple(sel)
    block = tensor[sel]
    # removing the control axis shifts later axes down by one
    t_axis = tgt - 1 if tgt > ctrl else tgt
    block = np.moveaxis(np.tensordot(u, block, axes=([1], [t_axis])), 0, t_axis)
    out[sel] = block
    return out


def bound_gates(template: "CircuitTemplate", params: np.ndarray):
    """Yield (kind, qubits, angle) with parameter slots resolved."""
    for g in template.gates:
        yield g.kind, g.qubits, g.resolve(params)


def apply_circuit(template: "CircuitTemplate", params, state: Statevector) -> Statevector:
    params = _check_binding(template, params)
    if state.n_qubits != template.n_qubits:
        raise DimensionError(f"state has {state.n_qubits} qubits, template has {template.n_qubits}")
    n = template.n_qubits
    psi = state.amplitudes.reshape((2,) * n)
    for kind, qubits, angle in bound_gates(template, params):
        psi = apply_gate(psi, n, kind, qubits, angle)
    amps = psi.reshape(-1)
    return Statevector(amps / np.linalg.norm(amps), n)


def circuit_unitary(template: "CircuitTemplate", params) -> UnitaryMatrix:
    params = _check_binding(template, params)
    n = template.n_qubits
    d = 2**n
    m = np.eye(d, dtype=complex).reshape((2,) * n + (d,))
    for kind, qubits, angle in bound_gates(template, params):
        m = apply_gate(m, n, kind, qubits, angle)
    return UnitaryMatrix(m.reshape(d, d))


def pauli_matrix(p: PauliString) -> np.ndarray:
    return p.coefficient * reduce(np.kron, (PAULIS[c] for c in p.ops))


def expectation(state: Statevector, h: "Hamiltonian | np.ndarray") -> float:
    m = getattr(h, "matrix", h)
    if m.shape != (state.amplitudes.size,) * 2:
        raise DimensionError(f"Hamiltonian shape {m.shape} does not match {state.n_qubits} qubits")
    a = state.amplitudes
    val = np.vdot(a, m @ a)
    if abs(val.imag) > 1e-10:
        raise ValueError(f"expectation has imaginary part {val.imag:g}; Hamiltonian not Hermitian?")
    return float(val.real)
