"""Problem-instance sets for the 4- and 8-qubit studies, at paper or desk scale."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import networkx as nx
import numpy as np

from . import hamiltonians as hm
from .hamiltonians import Distribution, Graph, Hamiltonian, ProblemClass

# paper-scale instance counts per class
PAPER_COUNTS = {
    4: {"maxcut": 10, "mvc": 10, "clique": 10, "random_diag": 60, "heisenberg": 23, "ising": 24, "adiabatic": 36, "random_nondiag": 60},
    8: {"maxcut": 20, "mvc": 20, "clique": 20, "random_diag": 60, "heisenberg": 23, "ising": 24, "adiabatic": 36, "random_nondiag": 60},
}
CLASS_KEYS = ("maxcut", "mvc", "clique", "random_diag", "heisenberg", "ising", "adiabatic", "random_nondiag")
DELTAS = (-1.5, -1.0, -0.5, 0.5, 1.0, 1.5)
ISING_J = (-1.0, -0.5, 0.5, 1.0)
ISING_G = (-1.5, -1.0, -0.5, 0.5, 1.0, 1.5)
ADIABATIC_S = (0.25, 0.5, 0.75)
DISTS = (Distribution.UNIFORM, Distribution.TRUNC_NORMAL, Distribution.LOG_UNIFORM)

# task tags for seed derivation: SeedSequence(master, spawn_key=(tag, ...))
TASK_DATASET = 1


@dataclass(frozen=True)
class DatasetSpec:
    n_qubits: int = 4
    counts: tuple[tuple[str, int], ...] = tuple(PAPER_COUNTS[4].items())
    penalty: float = 8.0
    adiabatic_s: tuple[float, ...] = ADIABATIC_S
    nondiag_terms: int | None = None

    def count(self, key: str) -> int:
        return dict(self.counts).get(key, 0)


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(TASK_DATASET, *key)))


def _subset(items: list, count: int) -> list:
    """``count`` items spread evenly over the list, in list order."""
    if count >= len(items):
        return list(items)
    if count <= 0:
        return []
    idx = np.unique(np.round(np.linspace(0, len(items) - 1, count)).astype(int))
    return [items[i] for i in idx]


def _to_graph(g: nx.Graph) -> Graph:
    return Graph.from_edges(g.number_of_nodes(), [tuple(sorted(e)) for e in g.edges()])


def four_node_graphs() -> list[Graph]:
    """All non-isomorphic 4-vertex graphs except the empty one (10 graphs)."""
    return [_to_graph(g) for g in nx.graph_atlas_g() if g.number_of_nodes() == 4 and g.number_of_edges() > 0]


def eight_node_graphs(seed: int) -> list[Graph]:
    """5 ER(0.3), 5 ER(0.7), 5 random 3-regular and 5 BA(m=2) graphs on 8 vertices."""
    out = []
    for i in range(5):
        out.append(nx.gnp_random_graph(8, 0.3, seed=int(_rng(seed, 90, 0, i).integers(2**31))))
    for i in range(5):
        out.append(nx.gnp_random_graph(8, 0.7, seed=int(_rng(seed, 90, 1, i).integers(2**31))))
    for i in range(5):
        out.append(nx.random_regular_graph(3, 8, seed=int(_rng(seed, 90, 2, i).integers(2**31))))
    for i in range(5):
        out.append(nx.barabasi_albert_graph(8, 2, seed=int(_rng(seed, 90, 3, i).integers(2**31))))
    return [_to_graph(g) for g in out]


def adiabatic_graphs(n: int, seed: int) -> list[Graph]:
    """Four graphs of increasing density for the adiabatic family.

    At 4 vertices: path (3 edges), cycle (4), diamond (5), complete (6).  At 8 vertices
    the edge counts are doubled and the graphs drawn uniformly with that many edges.
    """
    if n == 4:
        return [
            Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)]),
            Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)]),
            Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)]),
            Graph.from_edges(4, list(itertools.combinations(range(4), 2))),
        ]
    return [
        _to_graph(nx.gnm_random_graph(n, m, seed=int(_rng(seed, 91, m).integers(2**31))))
        for m in (6, 8, 10, 12)
    ]


def heisenberg_grid() -> list[tuple[float, float]]:
    out = []
    for d in DELTAS:
        gc = 2 * (1 + d)
        gs = (-1.0, 0.0, 1.0) if gc == 0 else (-gc, -gc / 2, gc / 2, gc)
        out += [(d, g) for g in gs]
    return out


def ising_grid() -> list[tuple[float, float]]:
    return [(j, g) for j in ISING_J for g in ISING_G]


def _graph_params(g: Graph) -> dict:
    return {"vertices": g.n_vertices, "edges": sorted(g.edges)}


def build_dataset(spec: DatasetSpec, seed: int) -> list[Hamiltonian]:
    """Deterministic instance list; ids encode class and index."""
    n = spec.n_qubits
    graphs = four_node_graphs() if n == 4 else eight_node_graphs(seed)
    out: list[Hamiltonian] = []

    def add(h: Hamiltonian, name: str, params: dict):
        out.append(hm.make_hamiltonian(h.matrix, h.problem_class, name=name, params=params))

    qubo = {
        "maxcut": lambda g: hm.maxcut(g),
        "mvc": lambda g: hm.min_vertex_cover(g, spec.penalty),
        "clique": lambda g: hm.max_clique(g),
    }
    for key, build in qubo.items():
        for i, g in enumerate(_subset(graphs, spec.count(key))):
            add(build(g), f"{key}_{i:02d}", _graph_params(g))

    per_dist = _split(spec.count("random_diag"), len(DISTS))
    for di, (dist, c) in enumerate(zip(DISTS, per_dist)):
        for i in range(c):
            h = hm.random_diagonal(n, dist, _rng(seed, 10, di, i))
            add(h, f"random_diag_{dist.value.lower()}_{i:02d}", {"dist": dist.value})

    for i, (d, g) in enumerate(_subset(heisenberg_grid(), spec.count("heisenberg"))):
        add(hm.heisenberg_xxz(n, d, g), f"heisenberg_{i:02d}", {"delta": d, "g": g})

    for i, (j, g) in enumerate(_subset(ising_grid(), spec.count("ising"))):
        add(hm.transverse_ising(n, j, g), f"ising_{i:02d}", {"J": j, "g": g})

    combos = [
        (key, gi, g, s)
        for key in qubo
        for gi, g in enumerate(adiabatic_graphs(n, seed))
        for s in spec.adiabatic_s
    ]
    sched = hm.bundled_schedule()
    for i, (key, gi, g, s) in enumerate(_subset(combos, spec.count("adiabatic"))):
        h = hm.adiabatic(qubo[key](g), s, sched)
        add(h, f"adiabatic_{i:02d}", {"problem": key, "graph": gi, "s": s, **_graph_params(g)})

    per_dist = _split(spec.count("random_nondiag"), len(DISTS))
    for di, (dist, c) in enumerate(zip(DISTS, per_dist)):
        for i in range(c):
            h = hm.random_nondiagonal(n, dist, spec.nondiag_terms, _rng(seed, 20, di, i))
            add(h, f"random_nondiag_{dist.value.lower()}_{i:02d}", {"dist": dist.value, **h.params})
    return out


def _split(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


CLASS_OF_KEY = {
    "maxcut": ProblemClass.MAXCUT,
    "mvc": ProblemClass.MIN_VERTEX_COVER,
    "clique": ProblemClass.MAX_CLIQUE,
    "random_diag": ProblemClass.RANDOM_DIAGONAL,
    "heisenberg": ProblemClass.HEISENBERG_XXZ,
    "ising": ProblemClass.TRANSVERSE_ISING,
    "adiabatic": ProblemClass.ADIABATIC,
    "random_nondiag": ProblemClass.RANDOM_NONDIAGONAL,
}
