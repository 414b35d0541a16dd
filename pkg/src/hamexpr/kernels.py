"""Batched circuit-unitary and frame-potential kernels.

The compiled extension ``hamexpr._core`` is used when it imports; otherwise the
numpy implementation in ``hamexpr._fallback`` is used.  Setting the environment
variable ``HAMEXPR_PURE_PYTHON=1`` forces the fallback.  Both back ends take the
same arguments and agree to round-off.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _fallback
from .circuits import CircuitTemplate
from .qcore import target_matrix

ROT_CODES = {"rx": 1, "ry": 2, "rz": 3, "crx": 1, "crz": 3}

try:
    if os.environ.get("HAMEXPR_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python back end requested")
    from . import _core as _compiled
except ImportError:
    _compiled = None

BACKENDS = {"python": _fallback}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled
DEFAULT_BACKEND = "compiled" if _compiled is not None else "python"


@dataclass(frozen=True)
class Program:
    """Flat array form of a template consumed by both back ends.

    Gate ``g`` acts with the 2x2 matrix ``fixed[g]`` (``rtype == 0``) or a rotation
    of type ``rtype`` by ``scale[g] * theta[slot[g]]`` on qubit ``target[g]``,
    conditioned on ``control[g] == 1`` when ``control[g] >= 0``.
    """

    n_qubits: int
    n_params: int
    target: np.ndarray
    control: np.ndarray
    rtype: np.ndarray
    slot: np.ndarray
    scale: np.ndarray
    fixed: np.ndarray


def compile_template(template: CircuitTemplate) -> Program:
    g = len(template.gates)
    target = np.zeros(g, dtype=np.int32)
    control = np.full(g, -1, dtype=np.int32)
    rtype = np.zeros(g, dtype=np.int32)
    slot = np.zeros(g, dtype=np.int32)
    scale = np.ones(g, dtype=np.float64)
    fixed = np.zeros((g, 2, 2), dtype=np.complex128)
    for i, op in enumerate(template.gates):
        if len(op.qubits) == 2:
            control[i], target[i] = op.qubits
        else:
            target[i] = op.qubits[0]
        if op.param_slot is not None:
            rtype[i] = ROT_CODES[op.kind]
            slot[i] = op.param_slot
            scale[i] = op.scale
        else:
            fixed[i] = target_matrix(op.kind, op.angle)
    return Program(template.n_qubits, template.param_count, target, control, rtype, slot, scale, fixed)


@dataclass(frozen=True)
class HamiltonianBatch:
    """Stack of Hamiltonians evaluated together against the same unitaries."""

    matrices: np.ndarray  # (m, d, d) complex
    diagonals: np.ndarray  # (m, d) float, valid where is_diag
    is_diag: np.ndarray  # (m,) uint8

    @classmethod
    def from_matrices(cls, mats) -> "HamiltonianBatch":
        mats = np.ascontiguousarray(np.stack([np.asarray(m, dtype=np.complex128) for m in mats]))
        off = mats.copy()
        idx = np.arange(mats.shape[1])
        off[:, idx, idx] = 0
        is_diag = (np.abs(off).reshape(len(mats), -1).max(axis=1, initial=0.0) < 1e-12).astype(np.uint8)
        diagonals = np.ascontiguousarray(np.diagonal(mats, axis1=1, axis2=2).real)
        return cls(mats, diagonals, is_diag)


def _backend(name: str | None):
    name = name or DEFAULT_BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"back end {name!r} unavailable; have {sorted(BACKENDS)}") from None


def _args(prog: Program):
    return (prog.n_qubits, prog.target, prog.control, prog.rtype, prog.slot, prog.scale, prog.fixed)


def unitaries(prog: Program, thetas: np.ndarray, backend: str | None = None) -> np.ndarray:
    """U(theta) for every row of ``thetas``; shape (B, d, d)."""
    thetas = np.ascontiguousarray(np.atleast_2d(thetas), dtype=np.float64)
    return _backend(backend).unitaries(*_args(prog), thetas)


def pair_products(prog: Program, theta_a: np.ndarray, theta_b: np.ndarray, backend: str | None = None):
    """U(theta_a)^dagger U(theta_b) row by row; shape (B, d, d)."""
    theta_a = np.ascontiguousarray(np.atleast_2d(theta_a), dtype=np.float64)
    theta_b = np.ascontiguousarray(np.atleast_2d(theta_b), dtype=np.float64)
    return _backend(backend).pair_products(*_args(prog), theta_a, theta_b)


def trace_terms(a: np.ndarray, hams: HamiltonianBatch, backend: str | None = None) -> np.ndarray:
    """Tr[H A H A^dagger]^2 for every A in the stack and every H; shape (B, m)."""
    a = np.ascontiguousarray(a, dtype=np.complex128)
    return _backend(backend).trace_terms(a, hams.matrices, hams.diagonals, hams.is_diag)


def pair_terms(
    prog: Program, theta_a: np.ndarray, theta_b: np.ndarray, hams: HamiltonianBatch, backend: str | None = None
) -> np.ndarray:
    """Frame-potential Monte Carlo terms for parameter pairs; shape (B, m)."""
    theta_a = np.ascontiguousarray(np.atleast_2d(theta_a), dtype=np.float64)
    theta_b = np.ascontiguousarray(np.atleast_2d(theta_b), dtype=np.float64)
    return _backend(backend).pair_terms(
        *_args(prog), theta_a, theta_b, hams.matrices, hams.diagonals, hams.is_diag
    )
