"""Experiment pipeline: expressibility table, VQE table, correlations and noise sweeps.

Randomness: every task draws from ``SeedSequence(master, spawn_key=(tag, ...))`` where
the tag names the task kind and the remaining entries are stable hashes of the
template id, layer count and Hamiltonian id.  Values therefore depend on the
item itself and never on iteration order, worker count or dataset composition.
"""
from __future__ import annotations

import csv
import hashlib
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import analysis
from .circuits import CircuitTemplate, build_template, decompose_to_native, validate_topology
from .config import ConfigError, ExperimentConfig
from .dataset import build_dataset
from .expressibility import adjusted_metrics, estimate_frame_potentials, haar_frame_potential, haar_thresholds
from .hamiltonians import Hamiltonian
from .noise import error_rate
from .vqe import IdealExecutor, NoisyExecutor, run_experiment

SCHEMA = 1
TASK_HAAR = 2
TASK_FRAME = 3
TASK_VQE = 4

EXPR_COLUMNS = (
    "template_id", "layers", "n_qubits", "hamiltonian_id", "k", "f_tilde", "sigma_tilde", "err", "f_haar",
    "epsilon", "epsilon_lo", "epsilon_hi", "gamma", "gamma_lo", "gamma_hi", "threshold_epsilon",
    "threshold_gamma", "maximal_flag", "seed",
)
RUN_COLUMNS = ("template_id", "layers", "hamiltonian_id", "run_index", "seed", "eval_count", "best_energy", "ar")
AGG_COLUMNS = ("template_id", "layers", "hamiltonian_id", "ar_mean", "ar_std")
CORR_COLUMNS = (
    "class", "subclass", "n_instances", "pearson_mean", "pearson_std", "spearman_mean", "spearman_std",
    "kendall_mean", "kendall_std", "mi_mean", "mi_std", "metric", "noise_err",
)
INSTANCE_COLUMNS = ("hamiltonian_id", "class", "subclass", "metric", "n", "bins", "pearson", "spearman", "kendall", "mi", "noise_err")
SCATTER_COLUMNS = ("template_id", "layers", "epsilon", "gamma", "ar_mean", "ar_std")
SWEEP_COLUMNS = ("profile",) + CORR_COLUMNS
DATASET_COLUMNS = ("hamiltonian_id", "class", "subclass", "n_qubits", "diagonal", "lambda_min", "lambda_max", "ground", "file")


class PipelineError(RuntimeError):
    pass


def stable_key(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:4], "big")


def task_seed(master: int, *key: int) -> int:
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


# --------------------------------------------------------------------------- #
# CSV helpers
# --------------------------------------------------------------------------- #


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_text(columns: Sequence[str], rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    buf.write(f"# schema={SCHEMA}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r[c]) for c in columns])
    return buf.getvalue()


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[dict]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(columns, rows))
    return path


def read_csv(path: str | Path) -> list[dict]:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    body = [ln for ln in lines if not ln.startswith("#")]
    if not body:
        raise ConfigError(f"{path}: empty table")
    return list(csv.DictReader(body))


# --------------------------------------------------------------------------- #
# work items
# --------------------------------------------------------------------------- #


@dataclass
class Outcome:
    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    skipped: list = field(default_factory=list)


def dataset(cfg: ExperimentConfig) -> list[Hamiltonian]:
    return cfg.selected(build_dataset(cfg.dataset, cfg.seed))


def circuits(cfg: ExperimentConfig) -> list[CircuitTemplate]:
    try:
        return [build_template(t, cfg.n_qubits, L) for t in cfg.templates for L in cfg.layers]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _map(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _guard(fn: Callable, label: str):
    def run(item):
        try:
            return fn(item), None
        except Exception as exc:  # noqa: BLE001 - recorded, one pair aborts only its rows
            return None, f"{label(item)}: {type(exc).__name__}: {exc}"

    return run


def expressibility_table(
    cfg: ExperimentConfig, hams: Sequence[Hamiltonian], circs: Sequence[CircuitTemplate], threads: int = 1
) -> Outcome:
    """One row per (template, layers, hamiltonian); Haar thresholds computed once per H."""
    out = Outcome()
    if not hams or not circs:
        return out

    def thresholds(h):
        return haar_thresholds(h, cfg.k, task_seed(cfg.seed, TASK_HAAR, stable_key(h.name)))

    th = _map(_guard(thresholds, lambda h: f"haar {h.name}"), list(hams), threads)
    good = []
    for h, (t, err) in zip(hams, th):
        if err:
            out.failures.append(err)
        else:
            good.append((h, t))
    f_haar = [haar_frame_potential(h) for h, _ in good]

    def one(c: CircuitTemplate):
        seed = task_seed(cfg.seed, TASK_FRAME, stable_key(c.template_id), c.layers)
        ests = estimate_frame_potentials(c, [h for h, _ in good], cfg.k, seed, cfg.sqrt_k)
        rows = []
        for (h, t), fh, est in zip(good, f_haar, ests):
            m = adjusted_metrics(est, fh, t)
            rows.append(dict(
                template_id=c.template_id, layers=c.layers, n_qubits=c.n_qubits, hamiltonian_id=h.name,
                k=est.k, f_tilde=est.f_tilde, sigma_tilde=est.sigma_tilde, err=est.err, f_haar=fh,
                epsilon=m.epsilon, epsilon_lo=m.epsilon_ci[0], epsilon_hi=m.epsilon_ci[1],
                gamma=m.gamma, gamma_lo=m.gamma_ci[0], gamma_hi=m.gamma_ci[1],
                threshold_epsilon=m.threshold_epsilon, threshold_gamma=m.threshold_gamma,
                maximal_flag=m.maximally_expressive, seed=seed,
            ))
        return rows

    if good:
        for rows, err in _map(_guard(one, lambda c: f"{c.template_id} L={c.layers}"), list(circs), threads):
            if err:
                out.failures.append(err)
            else:
                out.rows.extend(rows)
    out.rows.sort(key=lambda r: (r["template_id"], r["layers"], r["hamiltonian_id"]))
    return out


def make_executor(cfg: ExperimentConfig, profile: str):
    model = cfg.noise_model(profile)
    if model.is_ideal:
        return IdealExecutor()
    return NoisyExecutor(model, cfg.topology(), cfg.n_qubits)


def vqe_tables(
    cfg: ExperimentConfig,
    hams: Sequence[Hamiltonian],
    circs: Sequence[CircuitTemplate],
    profile: str,
    threads: int = 1,
) -> tuple[Outcome, list[dict]]:
    """Per-run rows (in Outcome.rows) and aggregate rows.  Under noise, circuits that
    do not fit the device topology are skipped and listed in Outcome.skipped."""
    out = Outcome()
    executor = make_executor(cfg, profile)
    usable = list(circs)
    if executor.noisy:
        topo = cfg.topology()
        usable = []
        for c in circs:
            if validate_topology(decompose_to_native(c), topo):
                out.skipped.append(f"{c.template_id} L={c.layers}: violates topology")
            else:
                usable.append(c)
    pairs = [(c, h) for c in usable for h in hams]

    def one(pair):
        c, h = pair
        master = task_seed(cfg.seed, TASK_VQE, stable_key(c.template_id), c.layers, stable_key(h.name))
        return run_experiment(c, h, executor, cfg.vqe, master)

    agg = []
    results = _map(_guard(one, lambda p: f"{p[0].template_id} L={p[0].layers} {p[1].name}"), pairs, threads)
    for (c, h), (res, err) in zip(pairs, results):
        if err:
            out.failures.append(err)
            continue
        for i, (run, (_, ar)) in enumerate(zip(res.runs, res.per_run)):
            out.rows.append(dict(
                template_id=c.template_id, layers=c.layers, hamiltonian_id=h.name, run_index=i,
                seed=run.seed, eval_count=run.eval_count, best_energy=run.best_energy, ar=ar,
            ))
        agg.append(dict(template_id=c.template_id, layers=c.layers, hamiltonian_id=h.name, ar_mean=res.ar_mean, ar_std=res.ar_std))
    key = lambda r: (r["template_id"], int(r["layers"]), r["hamiltonian_id"])
    out.rows.sort(key=lambda r: key(r) + (r["run_index"],))
    agg.sort(key=key)
    return out, agg


# --------------------------------------------------------------------------- #
# correlations
# --------------------------------------------------------------------------- #


def _safe(fn, *args) -> float:
    try:
        return float(fn(*args))
    except analysis.AnalysisError:
        return float("nan")


def instance_report(x, y) -> analysis.CorrelationReport:
    """Coefficients for one instance; undefined ones (constant series) become NaN."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mi = _safe(analysis.mutual_information, x, y) if x.size >= 10 else float("nan")
    return analysis.CorrelationReport(
        _safe(analysis.pearson, x, y), _safe(analysis.spearman, x, y), _safe(analysis.kendall_tau, x, y),
        mi, int(x.size), analysis.default_bins(x.size),
    )


def _key(r: dict) -> tuple:
    return (r["template_id"], int(r["layers"]), r["hamiltonian_id"])


def join_tables(expr_rows: list[dict], agg_rows: list[dict]) -> dict[str, list[tuple[dict, dict]]]:
    """Pair expressibility and A.R. rows per Hamiltonian; any key mismatch is an error."""
    ek = {_key(r): r for r in expr_rows}
    vk = {_key(r): r for r in agg_rows}
    if set(ek) != set(vk):
        only_e = sorted(set(ek) - set(vk))[:3]
        only_v = sorted(set(vk) - set(ek))[:3]
        raise ConfigError(f"key mismatch between tables: only in expressibility {only_e}, only in vqe {only_v}")
    out: dict[str, list] = {}
    for k in sorted(ek):
        out.setdefault(k[2], []).append((ek[k], vk[k]))
    return out


def correlate(
    hams: Sequence[Hamiltonian], expr_rows: list[dict], agg_rows: list[dict], noise_err: float = 0.0
) -> tuple[list[dict], list[dict], dict[str, list[dict]]]:
    """Class aggregates, per-instance coefficients and per-instance scatter data."""
    joined = join_tables(expr_rows, agg_rows)
    by_name = {h.name: h for h in hams}
    missing = sorted(set(joined) - set(by_name))
    if missing:
        raise ConfigError(f"tables reference unknown Hamiltonians {missing[:3]}")
    class_rows, inst_rows, scatter = [], [], {}
    for metric in ("epsilon", "gamma"):
        reports = []
        for hid, pairs in joined.items():
            if len(pairs) < 3:
                continue
            h = by_name[hid]
            x = [float(e[metric]) for e, _ in pairs]
            y = [float(v["ar_mean"]) for _, v in pairs]
            rep = instance_report(x, y)
            reports.append((h, rep))
            inst_rows.append(dict(
                hamiltonian_id=hid, **{"class": h.problem_class.value}, subclass=h.subclass, metric=metric,
                n=rep.n, bins=rep.bins, pearson=rep.pearson, spearman=rep.spearman, kendall=rep.kendall,
                mi=rep.mutual_info, noise_err=noise_err,
            ))
            if metric == "epsilon":
                scatter[hid] = [
                    dict(template_id=e["template_id"], layers=int(e["layers"]), epsilon=float(e["epsilon"]),
                         gamma=float(e["gamma"]), ar_mean=float(v["ar_mean"]), ar_std=float(v["ar_std"]))
                    for e, v in pairs
                ]
        if not reports:
            continue
        for agg in analysis.aggregate_by_class(reports):
            class_rows.append({
                "class": agg.problem_class, "subclass": agg.subclass, "n_instances": agg.n_instances,
                "pearson_mean": agg.means["pearson"], "pearson_std": agg.stds["pearson"],
                "spearman_mean": agg.means["spearman"], "spearman_std": agg.stds["spearman"],
                "kendall_mean": agg.means["kendall"], "kendall_std": agg.stds["kendall"],
                "mi_mean": agg.means["mutual_info"], "mi_std": agg.stds["mutual_info"],
                "metric": metric, "noise_err": noise_err,
            })
    return class_rows, inst_rows, scatter


def profile_errors(cfg: ExperimentConfig, profiles: Sequence[str]) -> list[tuple[str, float]]:
    topo = cfg.topology()
    out = [(p, error_rate(cfg.noise_model(p), topo, n_qubits=cfg.n_qubits).err_total) for p in profiles]
    errs = [e for _, e in out]
    if any(b <= a for a, b in zip(errs, errs[1:])):
        raise ConfigError(f"noise profiles must be listed in strictly increasing Err order, got {out}")
    return out
