"""Monte Carlo frame potentials and Hamiltonian expressibility.

The ansatz-Hamiltonian frame potential is the mean over parameter pairs of
``Tr[H U(a)^† U(b) H U(b)^† U(a)]^2``.  The Haar value has a closed form, so the
expressibility ``sqrt(F - F_haar)`` and ratio ``F / F_haar`` only need the
Monte Carlo estimate of ``F``.  Finite-sample noise is handled with thresholds
obtained by running the same estimator on Haar-random unitaries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from . import kernels
from .circuits import CircuitTemplate
from .hamiltonians import Hamiltonian
from .qcore import haar_unitaries

DEFAULT_K = 250_000
DESK_K = 50_000
BATCH = 2048
CONFIDENCE = 0.995


class BelowHaarError(ValueError):
    """The raw estimate fell below the Haar value; use :func:`adjusted_metrics`."""


@dataclass(frozen=True)
class FramePotentialEstimate:
    f_tilde: float
    sigma_tilde: float
    err: float
    k: int
    t_star: float


@dataclass(frozen=True)
class HaarThreshold:
    f_tilde_haar: float
    f_haar: float
    epsilon: float
    gamma: float


@dataclass(frozen=True)
class ExpressibilityResult:
    epsilon: float
    epsilon_ci: tuple[float, float]
    gamma: float
    gamma_ci: tuple[float, float]
    threshold_epsilon: float
    threshold_gamma: float
    maximally_expressive: bool


def as_seed_sequence(rng) -> np.random.SeedSequence:
    """Accept an int, a SeedSequence or a Generator (from which a seed is drawn)."""
    if isinstance(rng, np.random.SeedSequence):
        return rng
    if isinstance(rng, np.random.Generator):
        return np.random.SeedSequence(int(rng.integers(2**63)))
    return np.random.SeedSequence(int(rng))


def _batch_generators(seq: np.random.SeedSequence, k: int):
    """Fixed-size batches with their own child seed; independent of worker count."""
    n_batches = -(-k // BATCH)
    for j, child in enumerate(seq.spawn(n_batches)):
        size = min(BATCH, k - j * BATCH)
        yield size, np.random.default_rng(child)


def haar_frame_potential(h: Hamiltonian | np.ndarray) -> float:
    m = np.asarray(getattr(h, "matrix", h))
    d = m.shape[0]
    tr = np.trace(m).real
    tr2 = np.trace(m @ m).real
    return float((tr**4 + tr2**2) / (d * d - 1) - 2 * tr2 * tr**2 / (d * (d * d - 1)))


def t_star(k: int, confidence: float = CONFIDENCE) -> float:
    """Student-t critical value with k - 1 degrees of freedom."""
    return float(stats.t.ppf(confidence, k - 1))


def summarize_terms(terms: np.ndarray, sqrt_k: bool = False) -> FramePotentialEstimate:
    """Mean, population deviation and t-based half width of the Monte Carlo terms."""
    terms = np.asarray(terms, dtype=float)
    k = terms.size
    mean = math.fsum(terms) / k
    sigma = math.sqrt(math.fsum((terms - mean) ** 2) / k)
    ts = t_star(k)
    err = ts * sigma / math.sqrt(k) if sqrt_k else ts * sigma
    return FramePotentialEstimate(mean, sigma, err, k, ts)


def _hams(hs) -> list[Hamiltonian]:
    return list(hs) if isinstance(hs, (list, tuple)) else [hs]


def frame_potential_terms(
    template: CircuitTemplate, hamiltonians: Sequence[Hamiltonian], k: int, rng, backend: str | None = None
) -> np.ndarray:
    """Raw Monte Carlo terms, shape (k, len(hamiltonians)); all H share the parameter draws."""
    if k < 2:
        raise ValueError("need k >= 2 sample pairs")
    hams = _hams(hamiltonians)
    for h in hams:
        if h.dim != 2**template.n_qubits:
            raise ValueError(f"Hamiltonian dimension {h.dim} does not match a {template.n_qubits}-qubit template")
    prog = kernels.compile_template(template)
    batch = kernels.HamiltonianBatch.from_matrices([h.matrix for h in hams])
    p = template.param_count
    out = []
    for size, gen in _batch_generators(as_seed_sequence(rng), k):
        theta = gen.uniform(0.0, 2 * np.pi, size=(2, size, p))
        out.append(kernels.pair_terms(prog, theta[0], theta[1], batch, backend))
    return np.concatenate(out, axis=0)


def estimate_frame_potential(
    template: CircuitTemplate,
    h: Hamiltonian,
    k: int,
    rng,
    sqrt_k: bool = False,
    backend: str | None = None,
) -> FramePotentialEstimate:
    return summarize_terms(frame_potential_terms(template, [h], k, rng, backend)[:, 0], sqrt_k)


def estimate_frame_potentials(
    template: CircuitTemplate, hamiltonians: Sequence[Hamiltonian], k: int, rng, sqrt_k: bool = False,
    backend: str | None = None,
) -> list[FramePotentialEstimate]:
    terms = frame_potential_terms(template, hamiltonians, k, rng, backend)
    return [summarize_terms(terms[:, j], sqrt_k) for j in range(terms.shape[1])]


def haar_terms(hamiltonians: Sequence[Hamiltonian], k: int, rng, backend: str | None = None) -> np.ndarray:
    """Same estimator with Haar-random unitaries in place of the circuit; shape (k, m)."""
    if k < 2:
        raise ValueError("need k >= 2 sample pairs")
    hams = _hams(hamiltonians)
    d = hams[0].dim
    batch = kernels.HamiltonianBatch.from_matrices([h.matrix for h in hams])
    out = []
    for size, gen in _batch_generators(as_seed_sequence(rng), k):
        w = haar_unitaries(d, size, gen)
        v = haar_unitaries(d, size, gen)
        out.append(kernels.trace_terms(np.conj(np.swapaxes(w, 1, 2)) @ v, batch, backend))
    return np.concatenate(out, axis=0)


def haar_thresholds(h: Hamiltonian, k: int, rng, backend: str | None = None) -> HaarThreshold:
    return haar_thresholds_many([h], k, rng, backend)[0]


def haar_thresholds_many(
    hamiltonians: Sequence[Hamiltonian], k: int, rng, backend: str | None = None
) -> list[HaarThreshold]:
    terms = haar_terms(hamiltonians, k, rng, backend)
    out = []
    for j, h in enumerate(_hams(hamiltonians)):
        f_haar = haar_frame_potential(h)
        f_est = math.fsum(terms[:, j]) / terms.shape[0]
        dev = abs(f_est - f_haar)
        out.append(HaarThreshold(f_est, f_haar, math.sqrt(dev), 1.0 + dev / f_haar))
    return out


def hamiltonian_expressibility(est: FramePotentialEstimate, f_haar: float) -> tuple[float, tuple[float, float]]:
    if est.f_tilde < f_haar:
        raise BelowHaarError(f"F~ = {est.f_tilde:g} is below F_haar = {f_haar:g}")
    value = math.sqrt(est.f_tilde - f_haar)
    lo = math.sqrt(max(est.f_tilde - est.err, f_haar) - f_haar)
    hi = math.sqrt(est.f_tilde + est.err - f_haar)
    return value, (lo, hi)


def expressibility_ratio(est: FramePotentialEstimate, f_haar: float) -> tuple[float, tuple[float, float]]:
    value = est.f_tilde / f_haar
    lo = max(est.f_tilde - est.err, f_haar) / f_haar
    hi = (est.f_tilde + est.err) / f_haar
    return value, (lo, hi)


def adjusted_metrics(
    f_tilde: float | FramePotentialEstimate, f_haar: float, thresholds: HaarThreshold, err: float = 0.0
) -> ExpressibilityResult:
    """Expressibility and ratio with the threshold clipping applied below the Haar value."""
    if isinstance(f_tilde, FramePotentialEstimate):
        err = f_tilde.err
        f_tilde = f_tilde.f_tilde
    eps_haar, gam_haar = thresholds.epsilon, thresholds.gamma
    dev = f_tilde - f_haar
    if dev >= 0:
        eps = math.sqrt(dev)
        gam = f_tilde / f_haar
    else:
        eps = min(math.sqrt(-dev), eps_haar)
        gam = min(1.0 + (-dev) / f_haar, gam_haar)
    eps_ci = (
        math.sqrt(max(f_tilde - err, f_haar) - f_haar),
        max(math.sqrt(max(f_tilde + err - f_haar, 0.0)), eps),
    )
    gam_ci = (max(f_tilde - err, f_haar) / f_haar, max((f_tilde + err) / f_haar, gam))
    return ExpressibilityResult(
        epsilon=eps,
        epsilon_ci=eps_ci,
        gamma=gam,
        gamma_ci=gam_ci,
        threshold_epsilon=eps_haar,
        threshold_gamma=gam_haar,
        maximally_expressive=eps <= eps_haar,
    )


def expressibility(
    template: CircuitTemplate,
    h: Hamiltonian,
    k: int,
    rng,
    thresholds: HaarThreshold | None = None,
    sqrt_k: bool = False,
    backend: str | None = None,
) -> tuple[FramePotentialEstimate, ExpressibilityResult]:
    """Frame-potential estimate plus clipped metrics; thresholds are estimated if not given."""
    seq = as_seed_sequence(rng)
    circ_seq, haar_seq = seq.spawn(2)
    est = estimate_frame_potential(template, h, k, circ_seq, sqrt_k, backend)
    if thresholds is None:
        thresholds = haar_thresholds(h, k, haar_seq, backend)
    return est, adjusted_metrics(est, haar_frame_potential(h), thresholds)
