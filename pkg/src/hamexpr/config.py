"""Experiment configuration: dotted ``key = value`` text with bundled scale presets.

Example::

    seed = 7
    n_qubits = 4
    templates = circuit_02, circuit_05
    layers = 1-3
    expressibility.k = 50000
    vqe.n_runs = 5
    vqe.noise = paper
    dataset.counts = desk
    dataset.heisenberg = 2
    noise.profiles = ideal, intermediate, paper
    noise.mine.t1 = 1e-4

Later lines override earlier ones; ``#`` starts a comment.
"""
from __future__ import annotations

import fnmatch
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

from .circuits import catalog_ids, default_topology, load_topology, Topology
from .dataset import CLASS_KEYS, PAPER_COUNTS, DatasetSpec
from .noise import NoiseModel, NoiseModelError
from .vqe import VqeConfig, VqeError

DESK_DIVISOR = 4


class ConfigError(ValueError):
    pass


BUILTIN_PROFILES = {
    "ideal": dict(t1=math.inf, t2=math.inf, err1=0.0, err2=0.0),
    "intermediate": dict(t1=400e-6, t2=400e-6, err1=4e-5, err2=1e-3),
    "paper": dict(t1=200e-6, t2=200e-6, err1=1.6e-4, err2=4e-3),
}


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        out[key] = value
    return out


def preset_text(scale: str) -> str:
    try:
        return resources.files("hamexpr").joinpath("data", "presets", f"{scale}.cfg").read_text()
    except FileNotFoundError:
        raise ConfigError(f"unknown scale preset {scale!r}") from None


def _list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _int_range(value: str) -> list[int]:
    out = []
    for part in _list(value):
        if "-" in part:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return out


def _bool(value: str) -> bool:
    v = value.lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {value!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    n_qubits: int
    templates: tuple[str, ...]
    layers: tuple[int, ...]
    k: int
    sqrt_k: bool
    vqe: VqeConfig
    vqe_noise: str
    dataset: DatasetSpec
    select: tuple[str, ...]
    profiles: tuple[str, ...]
    noise_params: dict = field(default_factory=dict)
    topology_path: str | None = None
    scale: str = "desk"
    inputs: dict = field(default_factory=dict)

    def noise_model(self, name: str) -> NoiseModel:
        if name not in self.noise_params:
            raise ConfigError(f"unknown noise profile {name!r}")
        p = dict(self.noise_params[name])
        durations = p.pop("durations", {})
        try:
            return NoiseModel(p["t1"], p["t2"], p["err1"], p["err2"], durations)
        except (KeyError, NoiseModelError) as exc:
            raise ConfigError(f"noise profile {name!r}: {exc}") from None

    def topology(self) -> Topology:
        if self.topology_path:
            return load_topology(self.topology_path)
        return default_topology(self.n_qubits)

    def selected(self, hamiltonians):
        if not self.select:
            return list(hamiltonians)
        return [h for h in hamiltonians if any(fnmatch.fnmatchcase(h.name, pat) for pat in self.select)]

    def to_json(self) -> dict:
        d = asdict(self)
        d["vqe"] = {k: (v.value if hasattr(v, "value") else v) for k, v in asdict(self.vqe).items()}
        d["dataset"]["counts"] = dict(self.dataset.counts)
        d["noise_params"] = {
            name: {k: (repr(v) if isinstance(v, float) and math.isinf(v) else v) for k, v in p.items()}
            for name, p in self.noise_params.items()
        }
        return d

    def canonical_json(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def _noise_params(raw: dict[str, str], names: list[str]) -> dict:
    out = {k: dict(v) for k, v in BUILTIN_PROFILES.items()}
    for key, value in raw.items():
        if not key.startswith("noise.") or key == "noise.profiles":
            continue
        parts = key.split(".")
        if len(parts) == 3 and parts[2] == "file":
            m = NoiseModel.load(value)
            out[parts[1]] = dict(t1=m.t1, t2=m.t2, err1=m.err1, err2=m.err2, durations=dict(m.gate_durations))
        elif len(parts) == 3 and parts[2] in ("t1", "t2", "err1", "err2"):
            out.setdefault(parts[1], {})[parts[2]] = float(value)
        elif len(parts) == 4 and parts[2] == "duration":
            out.setdefault(parts[1], {}).setdefault("durations", {})[parts[3]] = float(value)
        else:
            raise ConfigError(f"unknown noise key {key!r}")
    for name in names:
        if name not in out:
            raise ConfigError(f"noise profile {name!r} is not defined")
    return out


KNOWN_TOP = {"seed", "n_qubits", "templates", "layers", "topology", "select"}
KNOWN_EXPR = {"k", "sqrt_k"}
KNOWN_VQE = {"n_shots", "n_runs", "max_evals", "initial_params", "optimizer", "rhobeg", "rhoend", "shot_mode", "objective", "noise"}
KNOWN_DATASET = set(CLASS_KEYS) | {"counts", "penalty", "adiabatic_s", "nondiag_terms"}


def build_config(raw: dict[str, str], scale: str = "desk") -> ExperimentConfig:
    for key in raw:
        head, _, rest = key.partition(".")
        ok = (
            (not rest and head in KNOWN_TOP)
            or (head == "expressibility" and rest in KNOWN_EXPR)
            or (head == "vqe" and rest in KNOWN_VQE)
            or (head == "dataset" and rest in KNOWN_DATASET)
            or (head == "inputs" and rest in ("expressibility", "vqe"))
            or head == "noise"
        )
        if not ok:
            raise ConfigError(f"unknown config key {key!r}")
    if "seed" not in raw:
        raise ConfigError("config must set 'seed' (no wall-clock seeding)")
    try:
        seed = int(raw["seed"])
        if not 0 <= seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        n = int(raw.get("n_qubits", "4"))
        if n not in (2, 3, 4, 5, 6, 7, 8):
            raise ConfigError(f"n_qubits must be in 2..8, got {n}")
        tsel = raw.get("templates", "all")
        templates = tuple(catalog_ids(n) if tsel == "all" else _list(tsel))
        layers = tuple(_int_range(raw.get("layers", "1-5")))
        if not layers or min(layers) < 1:
            raise ConfigError("layers must be positive")
        k = int(raw.get("expressibility.k", "50000"))
        if k < 2:
            raise ConfigError("expressibility.k must be >= 2")
        vqe = VqeConfig(
            n_shots=int(raw.get("vqe.n_shots", "1000")),
            n_runs=int(raw.get("vqe.n_runs", "5")),
            max_evals=int(raw.get("vqe.max_evals", "1000")),
            initial_params=raw.get("vqe.initial_params", "UniformRandom"),
            optimizer=raw.get("vqe.optimizer", "Cobyla"),
            rhobeg=float(raw.get("vqe.rhobeg", "1.0")),
            rhoend=float(raw.get("vqe.rhoend", "1e-4")),
            shot_mode=raw.get("vqe.shot_mode", "per-term"),
            objective=raw.get("vqe.objective", "sampled"),
        )
        counts_mode = raw.get("dataset.counts", scale)
        base = dict(PAPER_COUNTS[8 if n == 8 else 4])
        if counts_mode == "desk":
            base = {key: max(1, round(v / DESK_DIVISOR)) for key, v in base.items()}
        elif counts_mode != "paper":
            raise ConfigError(f"dataset.counts must be 'desk' or 'paper', got {counts_mode!r}")
        for key in CLASS_KEYS:
            if f"dataset.{key}" in raw:
                base[key] = int(raw[f"dataset.{key}"])
        nt = raw.get("dataset.nondiag_terms")
        spec = DatasetSpec(
            n_qubits=n,
            counts=tuple((key, base[key]) for key in CLASS_KEYS),
            penalty=float(raw.get("dataset.penalty", "8")),
            adiabatic_s=tuple(float(s) for s in _list(raw.get("dataset.adiabatic_s", "0.25,0.5,0.75"))),
            nondiag_terms=None if nt is None else int(nt),
        )
        profiles = tuple(_list(raw.get("noise.profiles", "ideal,paper")))
        vqe_noise = raw.get("vqe.noise", "ideal")
        noise_params = _noise_params(raw, list(profiles) + [vqe_noise])
        return ExperimentConfig(
            seed=seed,
            n_qubits=n,
            templates=templates,
            layers=layers,
            k=k,
            sqrt_k=_bool(raw.get("expressibility.sqrt_k", "false")),
            vqe=vqe,
            vqe_noise=vqe_noise,
            dataset=spec,
            select=tuple(_list(raw.get("select", ""))),
            profiles=profiles,
            noise_params=noise_params,
            topology_path=raw.get("topology"),
            scale=scale,
            inputs={k.split(".", 1)[1]: v for k, v in raw.items() if k.startswith("inputs.")},
        )
    except (ValueError, VqeError, NoiseModelError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def load_config(path: str | Path | None, scale: str = "desk", overrides: dict[str, str] | None = None) -> ExperimentConfig:
    raw = parse_config_text(preset_text(scale), f"<preset {scale}>")
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        raw.update(parse_config_text(text, str(path)))
    raw.update(overrides or {})
    return build_config(raw, scale)
