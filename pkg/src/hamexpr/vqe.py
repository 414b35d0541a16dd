"""Shot-based VQE: sampled Pauli expectations, COBYLA and the approximation ratio."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from . import kernels
from .circuits import CircuitTemplate, GateOp, Topology, decompose_to_native
from .hamiltonians import Hamiltonian
from .noise import NoiseModel, NoisySimulator
from .qcore import H_GATE, PAULIS, SX, PauliString

AR_CLAMP = 0.02


class VqeError(ValueError):
    pass


class InitialParams(str, enum.Enum):
    UNIFORM_RANDOM = "UniformRandom"
    ZEROS = "Zeros"


class Optimizer(str, enum.Enum):
    COBYLA = "Cobyla"
    NELDER_MEAD = "NelderMead"


class ShotMode(str, enum.Enum):
    PER_TERM = "per-term"
    SPLIT_EVENLY = "split-evenly"


class Objective(str, enum.Enum):
    """What the optimizer sees; the final energy of a run is always shot-sampled."""

    # multinomial shots for every Pauli term in its own basis
    SAMPLED = "sampled"
    # exact mean plus Gaussian noise of variance Var(H) / n_shots, as the reference
    # estimator primitive of common VQE toolkits does
    GAUSSIAN = "gaussian"
    # exact expectation (readout errors included when noisy); shots only for the final state
    EXACT = "exact"


@dataclass(frozen=True)
class VqeConfig:
    n_shots: int = 1000
    n_runs: int = 10
    max_evals: int = 1000
    initial_params: InitialParams = InitialParams.UNIFORM_RANDOM
    optimizer: Optimizer = Optimizer.COBYLA
    rhobeg: float = 1.0
    rhoend: float = 1e-4
    shot_mode: ShotMode = ShotMode.PER_TERM
    objective: Objective = Objective.SAMPLED

    def __post_init__(self):
        object.__setattr__(self, "objective", Objective(self.objective))
        object.__setattr__(self, "initial_params", InitialParams(self.initial_params))
        object.__setattr__(self, "optimizer", Optimizer(self.optimizer))
        object.__setattr__(self, "shot_mode", ShotMode(self.shot_mode))
        if self.n_shots < 1 or self.n_runs < 1 or self.max_evals < 1:
            raise VqeError("n_shots, n_runs and max_evals must be >= 1")
        if not 0 < self.rhoend < self.rhobeg:
            raise VqeError("need 0 < rhoend < rhobeg")


@dataclass(frozen=True)
class VqeRun:
    best_params: np.ndarray
    best_energy: float
    eval_count: int
    energy_trace: tuple[float, ...]
    final_energy: float
    seed: int
    converged: bool = True


@dataclass(frozen=True)
class ExperimentResult:
    ar_mean: float
    ar_std: float
    per_run: list[tuple[float, float]]
    runs: list[VqeRun] = field(default_factory=list, repr=False)


# --------------------------------------------------------------------------- #
# Pauli decomposition and measurement plans
# --------------------------------------------------------------------------- #

# T[p, i, j] with c_p = sum_ij T[p, i, j] M[i, j] = Tr[P M] / 2
_PAULI_PROJ = np.stack([PAULIS[c].T / 2 for c in "IXYZ"])


def pauli_decompose(h: Hamiltonian | np.ndarray, atol: float = 1e-14) -> list[PauliString]:
    m = np.asarray(getattr(h, "matrix", h), dtype=complex)
    d = m.shape[0]
    n = d.bit_length() - 1
    if d != 2**n or d > 256 or m.shape != (d, d):
        raise VqeError(f"cannot decompose a {m.shape} matrix (need 2^n x 2^n, n <= 8)")
    t = m.reshape((2,) * (2 * n))
    # contract each qubit's (row, column) pair into a Pauli index, one qubit at a time
    for q in range(n):
        t = np.tensordot(_PAULI_PROJ, t, axes=([1, 2], [0, n - q]))
        t = np.moveaxis(t, 0, -1)
    coeffs = t.reshape(-1)
    terms = []
    for idx, c in enumerate(coeffs):
        if abs(c) <= atol:
            continue
        if abs(c.imag) > 1e-10:
            raise VqeError("matrix is not Hermitian")
        labels = "".join("IXYZ"[(idx >> (2 * (n - 1 - q))) & 3] for q in range(n))
        terms.append(PauliString(labels, float(c.real)))
    return terms


@dataclass(frozen=True)
class MeasurementPlan:
    """Pauli terms of H with precomputed ±1 eigenvalue tables for their measurement basis."""

    n_qubits: int
    offset: float
    terms: tuple[PauliString, ...]
    signs: tuple[np.ndarray, ...]
    bounds: tuple[float, float] | None = None
    matrix: np.ndarray | None = field(default=None, repr=False, compare=False)

    @classmethod
    def from_hamiltonian(cls, h: Hamiltonian | np.ndarray) -> "MeasurementPlan":
        terms = pauli_decompose(h)
        n = int(np.asarray(getattr(h, "matrix", h)).shape[0]).bit_length() - 1
        offset = math.fsum(t.coefficient for t in terms if t.is_identity)
        rest = tuple(t for t in terms if not t.is_identity)
        bits = (np.arange(2**n)[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1
        signs = []
        for t in rest:
            mask = np.array([c != "I" for c in t.ops])
            signs.append(1.0 - 2.0 * (bits[:, mask].sum(axis=1) & 1))
        m = np.asarray(getattr(h, "matrix", h), dtype=complex)
        return cls(n, offset, rest, tuple(signs), getattr(h, "bounds", None), m)

    @property
    def l1_norm(self) -> float:
        return math.fsum(abs(t.coefficient) for t in self.terms) + abs(self.offset)


def _basis_key(ops: str) -> str:
    return "".join(c if c in "XY" else "Z" for c in ops)


# --------------------------------------------------------------------------- #
# executors
# --------------------------------------------------------------------------- #


class IdealExecutor:
    """Exact statevector; shots are drawn from the Born distribution."""

    noisy = False

    def __init__(self):
        self._programs = {}

    def prepare(self, template: CircuitTemplate, params) -> np.ndarray:
        prog = self._programs.get(template)
        if prog is None:
            prog = self._programs[template] = kernels.compile_template(template)
        if template.param_count == 0:
            params = np.zeros((1, 0))
        return kernels.unitaries(prog, np.asarray(params, dtype=float).reshape(1, -1))[0][:, 0]

    def distribution(self, psi: np.ndarray, basis: str) -> np.ndarray:
        n = len(basis)
        t = psi.reshape((2,) * n)
        for q, c in enumerate(basis):
            if c == "Z":
                continue
            g = H_GATE if c == "X" else SX
            t = np.moveaxis(np.tensordot(g, t, axes=([1], [q])), 0, q)
        p = np.abs(t.reshape(-1)) ** 2
        return p / p.sum()


_HALF_PI = math.pi / 2


def basis_change_gates(basis: str) -> list[GateOp]:
    """Native gadgets: X via rz-sx-rz (Hadamard up to phase), Y via sx."""
    gates = []
    for q, c in enumerate(basis):
        if c == "X":
            gates += [GateOp("rz", (q,), angle=_HALF_PI), GateOp("sx", (q,)), GateOp("rz", (q,), angle=_HALF_PI)]
        elif c == "Y":
            gates.append(GateOp("sx", (q,)))
    return gates


class NoisyExecutor:
    """Density-matrix execution of the native decomposition under a noise model."""

    noisy = True

    def __init__(self, model: NoiseModel, topology: Topology | None, n_qubits: int):
        self.model = model
        self.topology = topology
        self.sim = NoisySimulator(model, n_qubits, topology)
        self._native = {}

    def native(self, template: CircuitTemplate) -> CircuitTemplate:
        nat = self._native.get(template)
        if nat is None:
            nat = decompose_to_native(template)
            self.sim.check(nat)
            self._native[template] = nat
        return nat

    def prepare(self, template: CircuitTemplate, params) -> np.ndarray:
        return self.sim.run(self.native(template), params)

    def distribution(self, rho: np.ndarray, basis: str) -> np.ndarray:
        n = self.sim.n
        t = rho.reshape((2,) * (2 * n))
        gates = basis_change_gates(basis)
        if gates:
            t = self.sim.apply_gates(t, gates, ())
        return self.sim.measured_distribution(t)


def _state_moments(state: np.ndarray, m: np.ndarray) -> tuple[float, float]:
    """<H> and Var(H) for a statevector or a density matrix."""
    if state.ndim == 1:
        hv = m @ state
        mean = float(np.vdot(state, hv).real)
        return mean, float(np.vdot(hv, hv).real) - mean * mean
    hr = m @ state
    mean = float(np.trace(hr).real)
    return mean, float(np.trace(m @ hr).real) - mean * mean


def exact_expectation(
    template: CircuitTemplate, params, plan: "MeasurementPlan", executor, n_shots: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Infinite-shot limit of :func:`sample_expectation` (readout errors included when noisy).

    With ``n_shots`` and ``rng`` given, adds N(0, Var(H) / n_shots) noise.
    """
    state = executor.prepare(template, params)
    cache = {}
    parts = [plan.offset]
    for term, signs in zip(plan.terms, plan.signs):
        key = _basis_key(term.ops)
        p = cache.get(key)
        if p is None:
            p = cache[key] = executor.distribution(state, key)
        parts.append(term.coefficient * float(p @ signs))
    mean = math.fsum(parts)
    if n_shots is None:
        return mean
    _, var = _state_moments(state, plan.matrix)
    return mean + math.sqrt(max(var, 0.0) / n_shots) * float(rng.standard_normal())


def sample_expectation(
    template: CircuitTemplate,
    params,
    h: Hamiltonian | MeasurementPlan,
    executor,
    n_shots: int,
    rng: np.random.Generator,
    shot_mode: ShotMode | str = ShotMode.PER_TERM,
    objective: Objective | str = Objective.SAMPLED,
) -> float:
    """Shot estimate of <H>: each Pauli term is measured in its own basis, identity added exactly."""
    plan = h if isinstance(h, MeasurementPlan) else MeasurementPlan.from_hamiltonian(h)
    if plan.n_qubits != template.n_qubits:
        raise VqeError("Hamiltonian and template act on different registers")
    if n_shots < 1:
        raise VqeError("n_shots must be >= 1")
    if not plan.terms:
        return plan.offset
    objective = Objective(objective)
    if objective is Objective.GAUSSIAN:
        return exact_expectation(template, params, plan, executor, n_shots, rng)
    if objective is Objective.EXACT:
        return exact_expectation(template, params, plan, executor)
    shots = n_shots
    if ShotMode(shot_mode) is ShotMode.SPLIT_EVENLY:
        shots = max(1, n_shots // len(plan.terms))
    state = executor.prepare(template, params)
    cache = {}
    parts = [plan.offset]
    for term, signs in zip(plan.terms, plan.signs):
        key = _basis_key(term.ops)
        p = cache.get(key)
        if p is None:
            p = cache[key] = executor.distribution(state, key)
        counts = rng.multinomial(shots, p)
        parts.append(term.coefficient * float(counts @ signs) / shots)
    return math.fsum(parts)


# --------------------------------------------------------------------------- #
# optimizers
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class MinimizeResult:
    x: np.ndarray
    fun: float
    n_evals: int
    converged: bool
    trace: tuple[float, ...]


def _tracked(f: Callable, max_evals: int):
    state = {"best_x": None, "best_f": math.inf, "trace": []}

    def g(x):
        if len(state["trace"]) >= max_evals:
            # scipy may overshoot its budget by a call or two; stay inside ours
            return state["best_f"]
        v = float(f(np.array(x, dtype=float)))
        state["trace"].append(v)
        if v < state["best_f"]:
            state["best_f"], state["best_x"] = v, np.array(x, dtype=float)
        return v

    return g, state


def cobyla_minimize(f: Callable, x0, cfg: VqeConfig = VqeConfig()) -> MinimizeResult:
    """COBYLA from scipy; returns the best observed point and whether rhoend was reached."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    g, state = _tracked(f, cfg.max_evals)
    if x0.size == 0:
        v = g(x0)
        return MinimizeResult(x0, v, 1, True, tuple(state["trace"]))
    res = optimize.minimize(
        g, x0, method="COBYLA", options={"rhobeg": cfg.rhobeg, "tol": cfg.rhoend, "maxiter": cfg.max_evals}
    )
    converged = bool(res.status == 1) and len(state["trace"]) < cfg.max_evals
    return MinimizeResult(state["best_x"], state["best_f"], len(state["trace"]), converged, tuple(state["trace"]))


def nelder_mead_minimize(f: Callable, x0, cfg: VqeConfig = VqeConfig()) -> MinimizeResult:
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    g, state = _tracked(f, cfg.max_evals)
    if x0.size == 0:
        v = g(x0)
        return MinimizeResult(x0, v, 1, True, tuple(state["trace"]))
    simplex = np.vstack([x0] + [x0 + cfg.rhobeg * e for e in np.eye(x0.size)])
    res = optimize.minimize(
        g, x0, method="Nelder-Mead",
        options={"initial_simplex": simplex, "xatol": cfg.rhoend, "fatol": 0.0, "maxfev": cfg.max_evals},
    )
    converged = bool(res.success) and len(state["trace"]) < cfg.max_evals
    return MinimizeResult(state["best_x"], state["best_f"], len(state["trace"]), converged, tuple(state["trace"]))


def minimize(f: Callable, x0, cfg: VqeConfig = VqeConfig()) -> MinimizeResult:
    if cfg.optimizer is Optimizer.COBYLA:
        return cobyla_minimize(f, x0, cfg)
    return nelder_mead_minimize(f, x0, cfg)


# --------------------------------------------------------------------------- #
# approximation ratio and experiments
# --------------------------------------------------------------------------- #


def approximation_ratio(energy: float, bounds: tuple[float, float], clamp: float = AR_CLAMP) -> float:
    lo, hi = bounds
    if not hi - lo > 1e-12 * max(1.0, abs(lo), abs(hi)):
        raise VqeError("degenerate spectrum: lambda_min == lambda_max")
    ar = (energy - hi) / (lo - hi)
    if ar < -clamp or ar > 1 + clamp:
        raise VqeError(f"approximation ratio {ar:.4f} outside [0, 1] by more than {clamp}")
    return min(max(ar, 0.0), 1.0)


def run_seed(master_seed: int, run_index: int) -> int:
    """Seed of run ``run_index``; depends only on the master seed and the index."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(run_index),))
    return int(ss.generate_state(1, np.uint64)[0])


def run_vqe(
    template: CircuitTemplate,
    plan: MeasurementPlan,
    executor,
    cfg: VqeConfig,
    seed: int,
) -> VqeRun:
    rng = np.random.default_rng(seed)
    p = template.param_count
    if cfg.initial_params is InitialParams.UNIFORM_RANDOM:
        x0 = rng.uniform(0.0, 2 * np.pi, p)
    else:
        x0 = np.zeros(p)

    def objective(x):
        return sample_expectation(template, x, plan, executor, cfg.n_shots, rng, cfg.shot_mode, cfg.objective)

    res = minimize(objective, x0, cfg)
    # fresh shots at the optimum; the minimum of a noisy trace is biased low
    final = sample_expectation(template, res.x, plan, executor, cfg.n_shots, rng, cfg.shot_mode)
    return VqeRun(res.x, res.fun, res.n_evals, res.trace, final, seed, res.converged)


def run_experiment(
    template: CircuitTemplate,
    h: Hamiltonian,
    executor,
    cfg: VqeConfig,
    master_seed: int,
) -> ExperimentResult:
    plan = MeasurementPlan.from_hamiltonian(h)
    if h.bounds is None:
        raise VqeError("Hamiltonian carries no spectrum bounds")
    if getattr(executor, "noisy", False):
        executor.native(template)
    runs, per_run = [], []
    for r in range(cfg.n_runs):
        run = run_vqe(template, plan, executor, cfg, run_seed(master_seed, r))
        runs.append(run)
        per_run.append((run.best_energy, approximation_ratio(run.final_energy, h.bounds)))
    ars = np.array([a for _, a in per_run])
    ar_mean = math.fsum(ars) / len(ars)
    ar_std = math.sqrt(math.fsum((ars - ar_mean) ** 2) / len(ars))
    return ExperimentResult(ar_mean, ar_std, per_run, runs)
