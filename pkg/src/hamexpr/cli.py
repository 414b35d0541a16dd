"""Command-line entry point: ``hamexpr <command> [options]``.

Exit codes: 0 success, 2 configuration or input error, 3 partial failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__, kernels, pipeline
from .config import ConfigError, ExperimentConfig, load_config
from .hamiltonians import format_hamiltonian

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARTIAL = 3


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(out: Path, command: str, cfg: ExperimentConfig, files: list[Path], started: float, outcome):
    out.mkdir(parents=True, exist_ok=True)
    resolved = out / "config.json"
    resolved.write_text(json.dumps(cfg.to_json(), sort_keys=True, indent=2) + "\n")
    manifest = {
        "command": command,
        "config_hash": cfg.config_hash(),
        "files": {str(p.relative_to(out)): _sha256(p) for p in sorted(files)},
        "versions": {
            "hamexpr": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "kernel_backend": kernels.DEFAULT_BACKEND,
        },
        "timing_seconds": round(time.perf_counter() - started, 3),
        "failures": list(outcome.failures),
        "skipped": list(outcome.skipped),
    }
    (out / f"manifest_{command.replace(' ', '_')}.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def _finish(out, command, cfg, files, started, outcome) -> int:
    _write_manifest(out, command, cfg, files, started, outcome)
    for msg in outcome.failures:
        print(f"failed: {msg}", file=sys.stderr)
    print(f"{command}: wrote {len(files)} file(s) to {out}")
    return EXIT_PARTIAL if outcome.failures else EXIT_OK


def cmd_expressibility(cfg: ExperimentConfig, out: Path, threads: int) -> int:
    started = time.perf_counter()
    res = pipeline.expressibility_table(cfg, pipeline.dataset(cfg), pipeline.circuits(cfg), threads)
    files = [pipeline.write_csv(out / "expressibility.csv", pipeline.EXPR_COLUMNS, res.rows)]
    return _finish(out, "expressibility", cfg, files, started, res)


def _vqe_files(out: Path, res, agg, err: float | None, suffix: str = "") -> list[Path]:
    agg_cols = pipeline.AGG_COLUMNS
    if err is not None:
        agg_cols = agg_cols + ("noise_err",)
        agg = [dict(r, noise_err=err) for r in agg]
    return [
        pipeline.write_csv(out / f"vqe_runs{suffix}.csv", pipeline.RUN_COLUMNS, res.rows),
        pipeline.write_csv(out / f"vqe_aggregate{suffix}.csv", agg_cols, agg),
    ]


def cmd_vqe(cfg: ExperimentConfig, out: Path, threads: int) -> int:
    started = time.perf_counter()
    res, agg = pipeline.vqe_tables(cfg, pipeline.dataset(cfg), pipeline.circuits(cfg), cfg.vqe_noise, threads)
    model = cfg.noise_model(cfg.vqe_noise)
    err = None if model.is_ideal else pipeline.profile_errors(cfg, [cfg.vqe_noise])[0][1]
    files = _vqe_files(out, res, agg, err)
    return _finish(out, "vqe", cfg, files, started, res)


def _input(cfg: ExperimentConfig, out: Path, flag: str | None, key: str, default: str) -> Path:
    if flag:
        return Path(flag)
    if key in cfg.inputs:
        return Path(cfg.inputs[key])
    return out / default


def _write_correlation(out: Path, class_rows, inst_rows, scatter, name="correlation") -> list[Path]:
    files = [
        pipeline.write_csv(out / f"{name}.csv", pipeline.CORR_COLUMNS, class_rows),
        pipeline.write_csv(out / f"{name}_instances.csv", pipeline.INSTANCE_COLUMNS, inst_rows),
    ]
    for hid, rows in sorted(scatter.items()):
        files.append(pipeline.write_csv(out / "scatter" / f"{hid}.csv", pipeline.SCATTER_COLUMNS, rows))
    return files


def cmd_correlate(cfg: ExperimentConfig, out: Path, threads: int, expr_path=None, vqe_path=None) -> int:
    started = time.perf_counter()
    expr_rows = pipeline.read_csv(_input(cfg, out, expr_path, "expressibility", "expressibility.csv"))
    agg_rows = pipeline.read_csv(_input(cfg, out, vqe_path, "vqe", "vqe_aggregate.csv"))
    errs = {r.get("noise_err") for r in agg_rows}
    noise_err = float(errs.pop()) if len(errs) == 1 and None not in errs else 0.0
    # all validation happens before anything is written
    class_rows, inst_rows, scatter = pipeline.correlate(pipeline.dataset(cfg), expr_rows, agg_rows, noise_err)
    files = _write_correlation(out, class_rows, inst_rows, scatter)
    return _finish(out, "correlate", cfg, files, started, pipeline.Outcome())


def cmd_noise_sweep(cfg: ExperimentConfig, out: Path, threads: int, expr_path=None) -> int:
    started = time.perf_counter()
    profiles = pipeline.profile_errors(cfg, cfg.profiles)
    hams = pipeline.dataset(cfg)
    circs = pipeline.circuits(cfg)
    files = []
    outcome = pipeline.Outcome()
    if expr_path or "expressibility" in cfg.inputs:
        expr_rows = pipeline.read_csv(_input(cfg, out, expr_path, "expressibility", "expressibility.csv"))
    else:
        res = pipeline.expressibility_table(cfg, hams, circs, threads)
        outcome.failures += res.failures
        expr_rows = [{k: pipeline.fmt(v) for k, v in r.items()} for r in res.rows]
        files.append(pipeline.write_csv(out / "expressibility.csv", pipeline.EXPR_COLUMNS, res.rows))
    sweep = []
    for name, err in profiles:
        res, agg = pipeline.vqe_tables(cfg, hams, circs, name, threads)
        outcome.failures += res.failures
        outcome.skipped += [f"[{name}] {s}" for s in res.skipped]
        files += _vqe_files(out, res, agg, err, suffix=f"_{name}")
        keys = {pipeline._key(r) for r in agg}
        sub = [r for r in expr_rows if pipeline._key(r) in keys]
        agg_str = [{k: pipeline.fmt(v) for k, v in r.items()} for r in agg]
        class_rows, inst_rows, scatter = pipeline.correlate(hams, sub, agg_str, err)
        files += _write_correlation(out / f"profile_{name}", class_rows, inst_rows, scatter)
        sweep += [dict(r, profile=name) for r in class_rows]
    files.append(pipeline.write_csv(out / "noise_sweep.csv", pipeline.SWEEP_COLUMNS, sweep))
    return _finish(out, "noise-sweep", cfg, files, started, outcome)


def cmd_dataset_gen(cfg: ExperimentConfig, out: Path, threads: int) -> int:
    started = time.perf_counter()
    hams = pipeline.dataset(cfg)
    files, rows = [], []
    for h in hams:
        path = out / "hamiltonians" / f"{h.name}.ham"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(format_hamiltonian(h))
        files.append(path)
        rows.append(dict(
            hamiltonian_id=h.name, **{"class": h.problem_class.value}, subclass=h.subclass, n_qubits=h.n_qubits,
            diagonal=h.is_diagonal, lambda_min=h.bounds[0], lambda_max=h.bounds[1], ground=h.ground_kind.value,
            file=str(path.relative_to(out)),
        ))
    files.append(pipeline.write_csv(out / "dataset.csv", pipeline.DATASET_COLUMNS, rows))
    return _finish(out, "dataset gen", cfg, files, started, pipeline.Outcome())


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file layered over the scale preset")
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--threads", type=int, default=1, help="worker threads")
    common.add_argument("--scale", choices=("desk", "paper"), default="desk")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="extra config override")

    p = argparse.ArgumentParser(prog="hamexpr", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("expressibility", parents=[common], help="frame-potential expressibility table")
    sub.add_parser("vqe", parents=[common], help="shot-based VQE runs")
    c = sub.add_parser("correlate", parents=[common], help="correlate expressibility with A.R.")
    c.add_argument("--expressibility", dest="expr_path")
    c.add_argument("--vqe", dest="vqe_path", help="aggregate VQE CSV")
    n = sub.add_parser("noise-sweep", parents=[common], help="coefficients against average error rate")
    n.add_argument("--expressibility", dest="expr_path")
    d = sub.add_parser("dataset", help="problem-instance dataset")
    dsub = d.add_subparsers(dest="dataset_command", required=True)
    dsub.add_parser("gen", parents=[common], help="write the Hamiltonian dataset")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {}
    for item in args.set:
        if "=" not in item:
            print(f"error: --set expects KEY=VALUE, got {item!r}", file=sys.stderr)
            return EXIT_CONFIG
        k, v = item.split("=", 1)
        overrides[k.strip()] = v.strip()
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    out = Path(args.out)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg = load_config(args.config, args.scale, overrides)
        if args.command == "expressibility":
            return cmd_expressibility(cfg, out, args.threads)
        if args.command == "vqe":
            return cmd_vqe(cfg, out, args.threads)
        if args.command == "correlate":
            return cmd_correlate(cfg, out, args.threads, args.expr_path, args.vqe_path)
        if args.command == "noise-sweep":
            return cmd_noise_sweep(cfg, out, args.threads, args.expr_path)
        return cmd_dataset_gen(cfg, out, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
