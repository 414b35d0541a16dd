"""Pure numpy back end for :mod:`hamexpr.kernels` (vectorised over the batch)."""
from __future__ import annotations

import numpy as np


def _rotation(rtype: int, angles: np.ndarray) -> np.ndarray:
    c = np.cos(angles / 2)
    s = np.sin(angles / 2)
    m = np.zeros(angles.shape + (2, 2), dtype=np.complex128)
    if rtype == 1:
        m[:, 0, 0] = c
        m[:, 1, 1] = c
        m[:, 0, 1] = -1j * s
        m[:, 1, 0] = -1j * s
    elif rtype == 2:
        m[:, 0, 0] = c
        m[:, 1, 1] = c
        m[:, 0, 1] = -s
        m[:, 1, 0] = s
    elif rtype == 3:
        m[:, 0, 0] = c - 1j * s
        m[:, 1, 1] = c + 1j * s
    else:
        raise ValueError(f"bad rotation type {rtype}")
    return m


def _apply_1q(t: np.ndarray, u: np.ndarray, axis: int) -> np.ndarray:
    moved = np.moveaxis(t, axis, 1)
    shape = moved.shape
    flat = moved.reshape(shape[0], 2, -1)
    out = np.matmul(u, flat).reshape(shape)
    return np.moveaxis(out, 1, axis)


def _apply(t, n, target, control, u):
    """Apply a (B,2,2) or (2,2) block to rows of tensor ``t`` (B, 2,...,2, D)."""
    if control < 0:
        return _apply_1q(t, u, 1 + target)
    idx = [slice(None)] * t.ndim
    idx[1 + control] = 1
    idx = tuple(idx)
    axis = 1 + target if target < control else target
    t[idx] = _apply_1q(t[idx], u, axis)
    return t


def _gate_matrix(g, rtype, slot, scale, fixed, thetas):
    if rtype[g] == 0:
        return fixed[g]
    return _rotation(int(rtype[g]), scale[g] * thetas[:, slot[g]])


def _run(t, n, target, control, rtype, slot, scale, fixed, thetas, adjoint=False):
    order = range(len(target) - 1, -1, -1) if adjoint else range(len(target))
    for g in order:
        u = _gate_matrix(g, rtype, slot, scale, fixed, thetas)
        if adjoint:
            u = np.conj(np.swapaxes(u, -1, -2))
        t = _apply(t, n, int(target[g]), int(control[g]), u)
    return t


def _identity_stack(n, b):
    d = 2**n
    eye = np.broadcast_to(np.eye(d, dtype=np.complex128), (b, d, d)).copy()
    return eye.reshape((b,) + (2,) * n + (d,))


def unitaries(n, target, control, rtype, slot, scale, fixed, thetas):
    b, d = thetas.shape[0], 2**n
    t = _run(_identity_stack(n, b), n, target, control, rtype, slot, scale, fixed, thetas)
    return np.ascontiguousarray(t.reshape(b, d, d))


def pair_products(n, target, control, rtype, slot, scale, fixed, theta_a, theta_b):
    b, d = theta_a.shape[0], 2**n
    t = _run(_identity_stack(n, b), n, target, control, rtype, slot, scale, fixed, theta_b)
    t = _run(t, n, target, control, rtype, slot, scale, fixed, theta_a, adjoint=True)
    return np.ascontiguousarray(t.reshape(b, d, d))


def trace_terms(a, matrices, diagonals, is_diag):
    out = np.empty((a.shape[0], len(matrices)))
    absq = None
    for m in range(len(matrices)):
        if is_diag[m]:
            if absq is None:
                absq = np.abs(a) ** 2
            h = diagonals[m]
            tr = np.einsum("bij,i,j->b", absq, h, h)
        else:
            h = matrices[m]
            tr = np.einsum("bij,bij->b", h @ a, np.conj(a @ h)).real
        out[:, m] = tr * tr
    return out


def pair_terms(n, target, control, rtype, slot, scale, fixed, theta_a, theta_b, matrices, diagonals, is_diag):
    a = pair_products(n, target, control, rtype, slot, scale, fixed, theta_a, theta_b)
    return trace_terms(a, matrices, diagonals, is_diag)
