"""Problem Hamiltonians: QUBO graph problems, spin chains, adiabatic interpolants
and random diagonal / Pauli-sum instances.

Sign conventions: ``Z|0> = +|0>`` and ``Z|1> = -|1>``; a qubit value of 1 marks a
vertex as selected (in the cover, in the clique).
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .qcore import DimensionError, PauliString, pauli_matrix

MAX_QUBITS = 8


class ProblemClass(str, enum.Enum):
    MAXCUT = "MaxCut"
    MIN_VERTEX_COVER = "MinVertexCover"
    MAX_CLIQUE = "MaxClique"
    RANDOM_DIAGONAL = "RandomDiagonal"
    HEISENBERG_XXZ = "HeisenbergXXZ"
    TRANSVERSE_ISING = "TransverseIsing"
    ADIABATIC = "Adiabatic"
    RANDOM_NONDIAGONAL = "RandomNonDiagonal"


class GroundKind(str, enum.Enum):
    BASIS_STATE = "BasisState"
    SUPERPOSITION = "Superposition"


class Distribution(str, enum.Enum):
    UNIFORM = "Uniform"
    TRUNC_NORMAL = "TruncNormal"
    LOG_UNIFORM = "LogUniform"


@dataclass(frozen=True)
class Graph:
    n_vertices: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        norm = set()
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (0 <= i < self.n_vertices and 0 <= j < self.n_vertices):
                raise ValueError(f"edge ({i}, {j}) out of range for {self.n_vertices} vertices")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(norm))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        return cls(n, frozenset(edges))

    def complement_edges(self) -> list[tuple[int, int]]:
        return [e for e in itertools.combinations(range(self.n_vertices), 2) if e not in self.edges]


@dataclass(frozen=True)
class Hamiltonian:
    matrix: np.ndarray
    problem_class: ProblemClass
    is_diagonal: bool
    bounds: tuple[float, float] | None = None
    ground_kind: GroundKind | None = None
    name: str = ""
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"Hamiltonian must be square, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "problem_class", ProblemClass(self.problem_class))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_qubits(self) -> int:
        return int(self.dim).bit_length() - 1

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.matrix).real.copy()

    @property
    def subclass(self) -> str:
        """Class label used for aggregation; Heisenberg is split by ground-state kind."""
        if self.problem_class is ProblemClass.HEISENBERG_XXZ and self.ground_kind is not None:
            return f"{self.problem_class.value}:{self.ground_kind.value}"
        return self.problem_class.value

    def scaled(self, c: float) -> "Hamiltonian":
        return make_hamiltonian(c * self.matrix, self.problem_class, name=f"{c}*{self.name}", params=self.params)


def _off_diagonal_max(m: np.ndarray) -> float:
    off = m - np.diag(np.diag(m))
    return float(np.max(np.abs(off))) if off.size else 0.0


def make_hamiltonian(
    matrix: np.ndarray, problem_class: ProblemClass, name: str = "", params: dict | None = None
) -> Hamiltonian:
    """Wrap a matrix, compute its spectrum bounds and ground-state kind."""
    m = np.asarray(matrix, dtype=complex)
    if np.max(np.abs(m - m.conj().T)) > 1e-10:
        raise ValueError("matrix is not Hermitian")
    h = Hamiltonian(m, problem_class, _off_diagonal_max(m) < 1e-12, name=name, params=dict(params or {}))
    h = replace(h, bounds=spectrum_bounds(h))
    return replace(h, ground_kind=classify_ground_state(h))


# --------------------------------------------------------------------------- #
# helpers
# --------------------------------------------------------------------------- #


def bit_table(n: int) -> np.ndarray:
    """(2**n, n) array; column i holds qubit i's bit (qubit 0 = most significant)."""
    idx = np.arange(2**n)
    return (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1


def z_values(n: int) -> np.ndarray:
    """(2**n, n) array of Z_i eigenvalues (+1 for bit 0, -1 for bit 1)."""
    return 1 - 2 * bit_table(n)


def _check_size(n: int):
    if not 1 <= n <= MAX_QUBITS:
        raise DimensionError(f"register size must be in [1, {MAX_QUBITS}], got {n}")


def pauli_sum(terms: Iterable[PauliString], n: int) -> np.ndarray:
    m = np.zeros((2**n, 2**n), dtype=complex)
    for p in terms:
        if p.n_qubits != n:
            raise DimensionError(f"Pauli string {p.ops} does not act on {n} qubits")
        m += pauli_matrix(p)
    return m


def _two_site(n: int, i: int, j: int, a: str, b: str) -> str:
    ops = ["I"] * n
    ops[i] = a
    ops[j] = b
    return "".join(ops)


def _one_site(n: int, i: int, a: str) -> str:
    ops = ["I"] * n
    ops[i] = a
    return "".join(ops)


# --------------------------------------------------------------------------- #
# diagonal (QUBO) problems
# --------------------------------------------------------------------------- #


def maxcut(g: Graph) -> Hamiltonian:
    _check_size(g.n_vertices)
    z = z_values(g.n_vertices)
    diag = np.zeros(2**g.n_vertices)
    for i, j in sorted(g.edges):
        diag += 0.5 * (z[:, i] * z[:, j] - 1)
    return make_hamiltonian(np.diag(diag), ProblemClass.MAXCUT, params={"edges": sorted(g.edges)})


def min_vertex_cover(g: Graph, p: float = 8.0) -> Hamiltonian:
    if p <= 0:
        raise ValueError(f"penalty must be positive, got {p}")
    _check_size(g.n_vertices)
    z = z_values(g.n_vertices)
    diag = 0.5 * (1 - z).sum(axis=1).astype(float)
    for i, j in sorted(g.edges):
        diag += (p / 4) * (1 + z[:, i] + z[:, j] + z[:, i] * z[:, j])
    return make_hamiltonian(
        np.diag(diag), ProblemClass.MIN_VERTEX_COVER, params={"edges": sorted(g.edges), "penalty": p}
    )


def max_clique(g: Graph) -> Hamiltonian:
    _check_size(g.n_vertices)
    z = z_values(g.n_vertices)
    diag = -0.5 * (1 - z).sum(axis=1).astype(float)
    for i, j in g.complement_edges():
        diag += 0.5 * (1 - z[:, i] - z[:, j] + z[:, i] * z[:, j])
    return make_hamiltonian(np.diag(diag), ProblemClass.MAX_CLIQUE, params={"edges": sorted(g.edges)})


# --------------------------------------------------------------------------- #
# spin chains
# --------------------------------------------------------------------------- #


def _periodic_bonds(n: int) -> list[tuple[int, int]]:
    # literal periodic sum: for n = 2 the (0,1) bond appears twice
    return [(i, (i + 1) % n) for i in range(n)]


def heisenberg_xxz(n: int, delta: float, g: float) -> Hamiltonian:
    if n < 2:
        raise ValueError("Heisenberg chain needs n >= 2")
    _check_size(n)
    terms = []
    for i, j in _periodic_bonds(n):
        terms += [
            PauliString(_two_site(n, i, j, "X", "X")),
            PauliString(_two_site(n, i, j, "Y", "Y")),
            PauliString(_two_site(n, i, j, "Z", "Z"), delta),
        ]
    terms += [PauliString(_one_site(n, i, "Z"), g) for i in range(n)]
    return make_hamiltonian(
        pauli_sum(terms, n), ProblemClass.HEISENBERG_XXZ, params={"delta": delta, "g": g}
    )


def transverse_ising(n: int, J: float, g: float) -> Hamiltonian:
    if n < 2:
        raise ValueError("Ising chain needs n >= 2")
    _check_size(n)
    terms = [PauliString(_two_site(n, i, j, "X", "X"), -J) for i, j in _periodic_bonds(n)]
    terms += [PauliString(_one_site(n, i, "Z"), -g) for i in range(n)]
    return make_hamiltonian(pauli_sum(terms, n), ProblemClass.TRANSVERSE_ISING, params={"J": J, "g": g})


# --------------------------------------------------------------------------- #
# adiabatic interpolation
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class ScheduleTable:
    """Piecewise-linear annealing schedule A(s), B(s) sampled on s in [0, 1]."""

    s: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        if s.ndim != 1 or len(s) < 2 or np.any(np.diff(s) <= 0):
            raise ValueError("schedule points must be strictly increasing")
        if s[0] != 0.0 or s[-1] != 1.0:
            raise ValueError("schedule must cover s = 0 and s = 1")
        for name in ("s", "a", "b"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.a.shape != s.shape or self.b.shape != s.shape:
            raise ValueError("A and B must be sampled at every s point")

    def __call__(self, s: float) -> tuple[float, float]:
        return float(np.interp(s, self.s, self.a)), float(np.interp(s, self.s, self.b))

    @classmethod
    def parse(cls, text: str) -> "ScheduleTable":
        rows = [
            [float(v) for v in line.split()]
            for line in (raw.split("#", 1)[0].strip() for raw in text.splitlines())
            if line
        ]
        arr = np.array(rows)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2])


def bundled_schedule() -> ScheduleTable:
    return ScheduleTable.parse(resources.files("hamexpr").joinpath("data/schedule.txt").read_text())


def adiabatic(h_p: Hamiltonian, s: float, sched: ScheduleTable | None = None) -> Hamiltonian:
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    sched = sched or bundled_schedule()
    a, b = sched(s)
    n = h_p.n_qubits
    driver = pauli_sum((PauliString(_one_site(n, i, "X")) for i in range(n)), n)
    m = -(a / 2) * driver + (b / 2) * h_p.matrix
    return make_hamiltonian(
        m,
        ProblemClass.ADIABATIC,
        params={"s": s, "A": a, "B": b, "problem": h_p.problem_class.value, **h_p.params},
    )


# --------------------------------------------------------------------------- #
# random instances
# --------------------------------------------------------------------------- #

COEFF_RANGE = 10.0
TRUNC_NORMAL_SIGMA = 4.0
LOG_UNIFORM_LOW = 1e-2


def sample_coefficients(dist: Distribution | str, size: int, rng: np.random.Generator) -> np.ndarray:
    dist = Distribution(dist)
    if dist is Distribution.UNIFORM:
        return rng.uniform(-COEFF_RANGE, COEFF_RANGE, size)
    if dist is Distribution.TRUNC_NORMAL:
        out = rng.normal(0.0, TRUNC_NORMAL_SIGMA, size)
        bad = np.abs(out) > COEFF_RANGE
        while bad.any():
            out[bad] = rng.normal(0.0, TRUNC_NORMAL_SIGMA, int(bad.sum()))
            bad = np.abs(out) > COEFF_RANGE
        return out
    mag = np.exp(rng.uniform(np.log(LOG_UNIFORM_LOW), np.log(COEFF_RANGE), size))
    sign = rng.choice([-1.0, 1.0], size)
    return sign * mag


def random_diagonal(n: int, dist: Distribution | str, rng: np.random.Generator) -> Hamiltonian:
    _check_size(n)
    diag = sample_coefficients(dist, 2**n, rng)
    return make_hamiltonian(np.diag(diag), ProblemClass.RANDOM_DIAGONAL, params={"dist": Distribution(dist).value})


def all_pauli_labels(n: int, include_identity: bool = False) -> list[str]:
    labels = ["".join(p) for p in itertools.product("IXYZ", repeat=n)]
    return labels if include_identity else labels[1:]


def from_pauli_terms(
    terms: Sequence[PauliString], problem_class: ProblemClass = ProblemClass.RANDOM_NONDIAGONAL, name: str = ""
) -> Hamiltonian:
    n = terms[0].n_qubits
    return make_hamiltonian(
        pauli_sum(terms, n),
        problem_class,
        name=name,
        params={"terms": [(p.ops, p.coefficient) for p in terms]},
    )


def random_nondiagonal(
    n: int, dist: Distribution | str, n_terms: int | None, rng: np.random.Generator
) -> Hamiltonian:
    """Real combination of ``n_terms`` distinct non-identity Pauli strings (default 2n)."""
    _check_size(n)
    n_terms = 2 * n if n_terms is None else n_terms
    labels = all_pauli_labels(n)
    if not 1 <= n_terms <= len(labels):
        raise ValueError(f"n_terms must be in [1, {len(labels)}], got {n_terms}")
    picks = rng.choice(len(labels), size=n_terms, replace=False)
    coeffs = sample_coefficients(dist, n_terms, rng)
    terms = [PauliString(labels[i], float(c)) for i, c in zip(sorted(picks), coeffs)]
    h = from_pauli_terms(terms)
    return replace(h, params={**h.params, "dist": Distribution(dist).value})


# --------------------------------------------------------------------------- #
# spectra
# --------------------------------------------------------------------------- #


def spectrum_bounds(h: Hamiltonian | np.ndarray) -> tuple[float, float]:
    m = np.asarray(getattr(h, "matrix", h))
    if m.shape[0] > 2**MAX_QUBITS:
        raise DimensionError("spectrum_bounds supports dimension <= 256")
    if np.max(np.abs(m - m.conj().T)) > 1e-10:
        raise ValueError("matrix is not Hermitian")
    if _off_diagonal_max(m) < 1e-12:
        d = np.diag(m).real
        return float(d.min()), float(d.max())
    w, v = np.linalg.eigh(m)
    for k in (0, -1):
        res = np.linalg.norm(m @ v[:, k] - w[k] * v[:, k])
        if res > 1e-8:
            raise ArithmeticError(f"eigen-residual {res:g} exceeds 1e-8")
    return float(w[0]), float(w[-1])


def classify_ground_state(h: Hamiltonian, tol: float = 1e-8) -> GroundKind:
    lo = h.bounds[0] if h.bounds is not None else spectrum_bounds(h)[0]
    if np.min(np.diag(h.matrix).real) <= lo + tol:
        return GroundKind.BASIS_STATE
    return GroundKind.SUPERPOSITION


# --------------------------------------------------------------------------- #
# file formats
# --------------------------------------------------------------------------- #


def format_graph(g: Graph) -> str:
    return "".join([f"graph vertices={g.n_vertices}\n"] + [f"edge {i} {j}\n" for i, j in sorted(g.edges)])


def parse_graph(text: str) -> Graph:
    n, edges = None, []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "graph":
            n = int(parts[1].split("=", 1)[1])
        elif parts[0] == "edge":
            edges.append((int(parts[1]), int(parts[2])))
        else:
            raise ValueError(f"cannot parse graph line {line!r}")
    if n is None:
        raise ValueError("missing 'graph vertices=<n>' header")
    return Graph.from_edges(n, edges)


def load_graph(path: str | Path) -> Graph:
    return parse_graph(Path(path).read_text())


def format_hamiltonian(h: Hamiltonian) -> str:
    lo, hi = h.bounds if h.bounds else spectrum_bounds(h)
    ground = h.ground_kind.value if h.ground_kind else ""
    head = (
        f"# hamiltonian name={h.name or '-'} class={h.problem_class.value} n_qubits={h.n_qubits} "
        f"diagonal={int(h.is_diagonal)} lambda_min={float(lo)!r} lambda_max={float(hi)!r} ground={ground}\n"
    )
    rows = [" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row) for row in h.matrix]
    return head + "\n".join(rows) + "\n"


def parse_hamiltonian(text: str) -> Hamiltonian:
    lines = [l for l in text.splitlines() if l.strip()]
    meta = dict(tok.split("=", 1) for tok in lines[0].lstrip("#").split()[1:])
    rows = [[complex(*map(float, pair.split(","))) for pair in line.split()] for line in lines[1:]]
    name = "" if meta.get("name") == "-" else meta.get("name", "")
    return make_hamiltonian(np.array(rows), ProblemClass(meta["class"]), name=name)
