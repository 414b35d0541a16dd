"""Parametrized ansatz templates, the bundled circuit catalog and topology checks.

Templates are data.  A circuit-definition file lists the gates of a single
layer; :func:`build_template` replicates that layer ``L`` times with fresh
parameter slots per layer.

File format::

    template circuit_02 qubits=4 params_per_layer=8
    rx 0 slot=0
    cx 3,2
    rz 1 angle=1.5707963

and for topologies::

    topology qubits=4
    edge 0 1
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

ROTATION_KINDS = frozenset({"rx", "ry", "rz", "crx", "crz"})
FIXED_KINDS = frozenset({"id", "sx", "x", "h", "cx", "cz"})
TWO_QUBIT_KINDS = frozenset({"cx", "cz", "crx", "crz"})
GATE_KINDS = ROTATION_KINDS | FIXED_KINDS
NATIVE_KINDS = frozenset({"id", "rz", "sx", "x", "cx"})

_ALIASES = {"sqrtx": "sx", "h-gate": "h", "cnot": "cx"}


class TemplateError(ValueError):
    pass


@dataclass(frozen=True)
class GateOp:
    """One gate.  Rotation angles come from ``scale * theta[param_slot]`` or ``angle``."""

    kind: str
    qubits: tuple[int, ...]
    param_slot: int | None = None
    angle: float | None = None
    scale: float = 1.0

    def __post_init__(self):
        kind = _ALIASES.get(self.kind.lower(), self.kind.lower())
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "scale", float(self.scale))
        if self.angle is not None:
            object.__setattr__(self, "angle", float(self.angle))
        if kind not in GATE_KINDS:
            raise TemplateError(f"unknown gate kind {self.kind!r}")
        arity = 2 if kind in TWO_QUBIT_KINDS else 1
        if len(self.qubits) != arity:
            raise TemplateError(f"{kind} acts on {arity} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != arity or min(self.qubits) < 0:
            raise TemplateError(f"invalid qubits {self.qubits} for {kind}")
        if kind in ROTATION_KINDS:
            if (self.param_slot is None) == (self.angle is None):
                raise TemplateError(f"{kind} needs exactly one of slot= or angle=")
        elif self.param_slot is not None or self.angle is not None:
            raise TemplateError(f"{kind} takes no angle")

    @property
    def is_parametric(self) -> bool:
        return self.param_slot is not None

    def resolve(self, params) -> float | None:
        if self.param_slot is not None:
            return self.scale * float(params[self.param_slot])
        return self.angle

    def shifted(self, offset: int) -> "GateOp":
        if self.param_slot is None:
            return self
        return replace(self, param_slot=self.param_slot + offset)

    def to_line(self) -> str:
        s = f"{self.kind} {','.join(map(str, self.qubits))}"
        if self.param_slot is not None:
            s += f" slot={self.param_slot}"
            if self.scale != 1.0:
                s += f" scale={self.scale!r}"
        elif self.angle is not None:
            s += f" angle={self.angle!r}"
        return s


@dataclass(frozen=True)
class CircuitTemplate:
    template_id: str
    n_qubits: int
    layers: int
    gates: tuple[GateOp, ...]
    param_count: int

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n_qubits < 1 or self.layers < 1:
            raise TemplateError("n_qubits and layers must be >= 1")
        for g in self.gates:
            if max(g.qubits) >= self.n_qubits:
                raise TemplateError(f"gate {g.to_line()!r} outside {self.n_qubits}-qubit register")
        slots = {g.param_slot for g in self.gates if g.param_slot is not None}
        if slots != set(range(self.param_count)):
            raise TemplateError(
                f"parameter slots {sorted(slots)} do not cover 0..{self.param_count - 1} exactly"
            )

    @classmethod
    def from_gates(cls, gates: Iterable[GateOp], n_qubits: int, template_id: str = "custom"):
        gates = tuple(gates)
        slots = [g.param_slot for g in gates if g.param_slot is not None]
        return cls(template_id, n_qubits, 1, gates, max(slots) + 1 if slots else 0)

    def __add__(self, other: "CircuitTemplate") -> "CircuitTemplate":
        """Run ``self`` then ``other``; parameters are concatenated."""
        if other.n_qubits != self.n_qubits:
            raise TemplateError("cannot concatenate templates on different registers")
        gates = self.gates + tuple(g.shifted(self.param_count) for g in other.gates)
        return CircuitTemplate(
            f"{self.template_id}+{other.template_id}",
            self.n_qubits,
            self.layers + other.layers,
            gates,
            self.param_count + other.param_count,
        )

    @property
    def two_qubit_count(self) -> int:
        return sum(g.kind in TWO_QUBIT_KINDS for g in self.gates)

    def is_native(self) -> bool:
        return all(g.kind in NATIVE_KINDS for g in self.gates)


@dataclass(frozen=True)
class Topology:
    n_qubits: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        norm = set()
        for e in self.edges:
            i, j = (int(v) for v in e)
            if i == j:
                raise TemplateError(f"self-loop on qubit {i}")
            if not (0 <= i < self.n_qubits and 0 <= j < self.n_qubits):
                raise TemplateError(f"edge ({i}, {j}) outside {self.n_qubits}-qubit register")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(norm))

    def connects(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    @classmethod
    def line(cls, n: int) -> "Topology":
        return cls(n, frozenset((i, i + 1) for i in range(n - 1)))

    @classmethod
    def ring(cls, n: int) -> "Topology":
        return cls(n, frozenset((i, (i + 1) % n) for i in range(n)))

    @classmethod
    def full(cls, n: int) -> "Topology":
        return cls(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)))


@dataclass(frozen=True)
class Violation:
    gate_index: int
    kind: str
    qubits: tuple[int, ...]


# --------------------------------------------------------------------------- #
# file formats
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class LayerDefinition:
    """Single-layer pattern as read from a circuit-definition file."""

    template_id: str
    n_qubits: int
    params_per_layer: int
    gates: tuple[GateOp, ...]
    meta: dict = field(default_factory=dict, compare=False)


def _kv(tokens: Sequence[str], where: str) -> dict:
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise TemplateError(f"{where}: expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        out[k] = v
    return out


def parse_gate_line(line: str, where: str = "<gate>") -> GateOp:
    parts = line.split()
    if len(parts) < 2:
        raise TemplateError(f"{where}: expected '<kind> <qubits> [slot=k|angle=x]'")
    kind, qubits = parts[0], tuple(int(q) for q in parts[1].split(","))
    opts = _kv(parts[2:], where)
    slot = int(opts.pop("slot")) if "slot" in opts else None
    angle = float(opts.pop("angle")) if "angle" in opts else None
    scale = float(opts.pop("scale", 1.0))
    if opts:
        raise TemplateError(f"{where}: unknown options {sorted(opts)}")
    return GateOp(kind, qubits, slot, angle, scale)


def parse_definitions(text: str, source: str = "<string>") -> dict[tuple[str, int], LayerDefinition]:
    """Parse a circuit-definition file into ``{(id, n_qubits): LayerDefinition}``."""
    defs: dict[tuple[str, int], LayerDefinition] = {}
    header = None
    gates: list[GateOp] = []

    def flush():
        if header is None:
            return
        tid, n, p, meta = header
        d = LayerDefinition(tid, n, p, tuple(gates), meta)
        CircuitTemplate(tid, n, 1, d.gates, p)  # validates slots and qubit range
        if (tid, n) in defs:
            raise TemplateError(f"{source}: duplicate template {tid} qubits={n}")
        defs[(tid, n)] = d

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if line.startswith("template "):
            flush()
            parts = line.split()
            opts = _kv(parts[2:], where)
            try:
                n, p = int(opts.pop("qubits")), int(opts.pop("params_per_layer"))
            except KeyError as exc:
                raise TemplateError(f"{where}: header missing {exc}") from None
            header, gates = (parts[1], n, p, opts), []
        else:
            if header is None:
                raise TemplateError(f"{where}: gate before any template header")
            gates.append(parse_gate_line(line, where))
    flush()
    return defs


def load_definitions(path: str | Path) -> dict[tuple[str, int], LayerDefinition]:
    path = Path(path)
    return parse_definitions(path.read_text(), str(path))


def format_definition(d: LayerDefinition) -> str:
    lines = [f"template {d.template_id} qubits={d.n_qubits} params_per_layer={d.params_per_layer}"]
    lines += [g.to_line() for g in d.gates]
    return "\n".join(lines) + "\n"


def parse_topology(text: str, source: str = "<string>") -> Topology:
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "topology":
            n = int(_kv(parts[1:], f"{source}:{lineno}")["qubits"])
        elif parts[0] == "edge" and len(parts) == 3:
            edges.append((int(parts[1]), int(parts[2])))
        else:
            raise TemplateError(f"{source}:{lineno}: cannot parse {line!r}")
    if n is None:
        raise TemplateError(f"{source}: missing 'topology qubits=<n>' header")
    return Topology(n, frozenset(edges))


def load_topology(path: str | Path) -> Topology:
    path = Path(path)
    return parse_topology(path.read_text(), str(path))


def format_topology(topo: Topology) -> str:
    return "".join([f"topology qubits={topo.n_qubits}\n"] + [f"edge {i} {j}\n" for i, j in sorted(topo.edges)])


@lru_cache(maxsize=None)
def bundled_catalog() -> dict[tuple[str, int], LayerDefinition]:
    text = resources.files("hamexpr").joinpath("data/catalog.txt").read_text()
    return parse_definitions(text, "catalog.txt")


def default_topology(n_qubits: int) -> Topology:
    """Bundled defaults: 4-qubit line, 8-qubit ring, line otherwise."""
    name = {4: "line4.txt", 8: "ring8.txt"}.get(n_qubits)
    if name is None:
        return Topology.line(n_qubits)
    text = resources.files("hamexpr").joinpath(f"data/{name}").read_text()
    return parse_topology(text, name)


# --------------------------------------------------------------------------- #
# generic patterns (any register size)
# --------------------------------------------------------------------------- #


def _rotations(kinds: Sequence[str], qubits: Iterable[int], start: int) -> list[GateOp]:
    out = []
    slot = start
    for kind in kinds:
        for q in qubits:
            out.append(GateOp(kind, (q,), param_slot=slot))
            slot += 1
    return out


def _generic_layer(template_id: str, n: int) -> list[GateOp] | None:
    if template_id == "empty":
        return []
    if template_id == "rz_only":
        return _rotations(["rz"], range(n), 0)
    if template_id == "rx_only":
        return _rotations(["rx"], range(n), 0)
    if template_id == "rx_ring":
        gates = _rotations(["rx"], range(n), 0)
        if n > 1:
            pairs = [(i, i + 1) for i in range(n - 1)] + ([(n - 1, 0)] if n > 2 else [])
            gates += [GateOp("cx", p) for p in pairs]
        return gates
    if template_id == "hea_linear":
        # Ry-Rz column followed by a CX chain; nearest-neighbour only
        gates = _rotations(["ry", "rz"], range(n), 0)
        gates += [GateOp("cx", (i, i + 1)) for i in range(n - 1)]
        return gates
    return None


GENERIC_PATTERNS = ("empty", "rz_only", "rx_only", "rx_ring", "hea_linear")


def catalog_ids(n_qubits: int = 4) -> list[str]:
    return sorted(tid for tid, n in bundled_catalog() if n == n_qubits)


def layer_definition(
    template_id: str, n_qubits: int, definitions: dict | None = None
) -> LayerDefinition:
    defs = bundled_catalog() if definitions is None else definitions
    if (template_id, n_qubits) in defs:
        return defs[(template_id, n_qubits)]
    gates = _generic_layer(template_id, n_qubits)
    if gates is None:
        known = sorted({tid for tid, _ in defs} | set(GENERIC_PATTERNS))
        raise TemplateError(f"unknown template {template_id!r} for {n_qubits} qubits; known: {known}")
    p = sum(g.is_parametric for g in gates)
    return LayerDefinition(template_id, n_qubits, p, tuple(gates))


def build_template(
    template_id: str, n_qubits: int, layers: int = 1, definitions: dict | None = None
) -> CircuitTemplate:
    """Replicate the single-layer pattern ``layers`` times with disjoint parameter slots."""
    if layers < 1:
        raise TemplateError("layers must be >= 1")
    d = layer_definition(template_id, n_qubits, definitions)
    gates = []
    for layer in range(layers):
        gates.extend(g.shifted(layer * d.params_per_layer) for g in d.gates)
    return CircuitTemplate(template_id, n_qubits, layers, tuple(gates), layers * d.params_per_layer)


# --------------------------------------------------------------------------- #
# hardware constraints
# --------------------------------------------------------------------------- #


def validate_topology(template: CircuitTemplate, topo: Topology) -> list[Violation]:
    return [
        Violation(i, g.kind, g.qubits)
        for i, g in enumerate(template.gates)
        if len(g.qubits) == 2 and not topo.connects(*g.qubits)
    ]


_HALF_PI = math.pi / 2


def _rz_like(src: GateOp, q: int, scale: float = 1.0) -> GateOp:
    """Rz carrying the rotation angle of ``src`` (slot or fixed), times ``scale``."""
    if src.param_slot is not None:
        return GateOp("rz", (q,), param_slot=src.param_slot, scale=src.scale * scale)
    return GateOp("rz", (q,), angle=src.angle * scale)


def _hadamard(q: int) -> list[GateOp]:
    return [GateOp("rz", (q,), angle=_HALF_PI), GateOp("sx", (q,)), GateOp("rz", (q,), angle=_HALF_PI)]


def _native(g: GateOp) -> list[GateOp]:
    k = g.kind
    if k in NATIVE_KINDS:
        return [g]
    if k == "h":
        return _hadamard(g.qubits[0])
    if k == "rx":
        q = g.qubits[0]
        return _hadamard(q) + [_rz_like(g, q)] + _hadamard(q)
    if k == "ry":
        q = g.qubits[0]
        return (
            [GateOp("rz", (q,), angle=-_HALF_PI)]
            + _native(replace(g, kind="rx"))
            + [GateOp("rz", (q,), angle=_HALF_PI)]
        )
    if k == "cz":
        c, t = g.qubits
        return _hadamard(t) + [GateOp("cx", (c, t))] + _hadamard(t)
    if k == "crz":
        c, t = g.qubits
        return [_rz_like(g, t, 0.5), GateOp("cx", (c, t)), _rz_like(g, t, -0.5), GateOp("cx", (c, t))]
    if k == "crx":
        t = g.qubits[1]
        return _hadamard(t) + _native(replace(g, kind="crz")) + _hadamard(t)
    raise TemplateError(f"no native decomposition registered for {k!r}")


def decompose_to_native(template: CircuitTemplate) -> CircuitTemplate:
    """Rewrite into {id, rz, sx, x, cx}; the unitary is preserved up to global phase."""
    gates = tuple(n for g in template.gates for n in _native(g))
    return CircuitTemplate(template.template_id, template.n_qubits, template.layers, gates, template.param_count)
