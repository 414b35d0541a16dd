import json
import subprocess
import sys
from pathlib import Path

import pytest

from hamexpr import cli, pipeline

BASE = [
    "--seed", "3",
    "--set", "templates=circuit_01,circuit_02,circuit_03",
    "--set", "layers=1",
    "--set", "expressibility.k=200",
    "--set", "vqe.n_runs=2",
    "--set", "vqe.max_evals=25",
    "--set", "select=maxcut_00,heisenberg_01",
    "--set", "noise.profiles=ideal,paper",
]


def outputs(root: Path) -> dict:
    """Every output file except the manifests, whose timing field varies."""
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file() and not p.name.startswith("manifest_")}


def run(*args):
    return cli.main(list(args))


def test_dataset_gen(tmp_path):
    out = tmp_path / "a"
    assert run("dataset", "gen", "--seed", "1", "--out", str(out)) == 0
    rows = pipeline.read_csv(out / "dataset.csv")
    assert len(rows) == len(list((out / "hamiltonians").glob("*.ham")))
    manifest = json.loads((out / "manifest_dataset_gen.json").read_text())
    assert manifest["files"]["dataset.csv"] and manifest["versions"]["hamexpr"]
    again = tmp_path / "b"
    run("dataset", "gen", "--seed", "1", "--out", str(again))
    assert outputs(out) == outputs(again)


def test_full_flow_is_byte_identical(tmp_path):
    dirs = []
    for name, threads in (("a", "1"), ("b", "2")):
        out = tmp_path / name
        for cmd in ("expressibility", "vqe", "correlate"):
            assert run(cmd, *BASE, "--out", str(out), "--threads", threads) == 0
        dirs.append(out)
    a, b = outputs(dirs[0]), outputs(dirs[1])
    assert a == b
    assert {"expressibility.csv", "vqe_runs.csv", "vqe_aggregate.csv", "correlation.csv", "correlation_instances.csv", "config.json"} <= set(a)
    m1 = json.loads((dirs[0] / "manifest_vqe.json").read_text())
    m2 = json.loads((dirs[1] / "manifest_vqe.json").read_text())
    assert m1["config_hash"] == m2["config_hash"] and m1["files"] == m2["files"]


def test_noise_sweep(tmp_path):
    out = tmp_path / "s"
    args = [a.replace("circuit_01,circuit_02,circuit_03", "circuit_01,circuit_02,circuit_03,circuit_05") for a in BASE]
    assert run("noise-sweep", *args, "--set", "vqe.objective=exact", "--out", str(out)) == 0
    sweep = pipeline.read_csv(out / "noise_sweep.csv")
    assert {r["profile"] for r in sweep} == {"ideal", "paper"}
    manifest = json.loads((out / "manifest_noise-sweep.json").read_text())
    assert any("circuit_05" in s for s in manifest["skipped"])
    agg = pipeline.read_csv(out / "vqe_aggregate_paper.csv")
    assert {r["template_id"] for r in agg} == {"circuit_01", "circuit_02", "circuit_03"} and float(agg[0]["noise_err"]) > 0


@pytest.mark.parametrize("args", [
    ["expressibility", "--set", "bogus=1"],
    ["expressibility"],  # no seed anywhere
    ["expressibility", "--seed", "1", "--set", "templates=nope"],
    ["expressibility", "--seed", "1", "--set", "oops"],
    ["expressibility", "--seed", "1", "--threads", "0"],
    ["expressibility", "--seed", "1", "--config", "/nonexistent.cfg"],
])
def test_config_errors_exit_2(tmp_path, args, capsys):
    assert run(*args, "--out", str(tmp_path)) == cli.EXIT_CONFIG
    assert "error" in capsys.readouterr().err


def test_correlate_key_mismatch_writes_nothing(tmp_path):
    out = tmp_path / "m"
    assert run("expressibility", *BASE, "--out", str(out)) == 0
    other = BASE[:]
    other[other.index("templates=circuit_01,circuit_02,circuit_03")] = "templates=circuit_01,circuit_02"
    assert run("vqe", *other, "--out", str(out)) == 0
    assert run("correlate", *BASE, "--out", str(out)) == cli.EXIT_CONFIG
    assert not (out / "correlation.csv").exists()


def test_partial_failure_exit_3(tmp_path, monkeypatch):
    real = pipeline.run_experiment

    def flaky(c, h, ex, cfg, seed):
        if h.name == "heisenberg_01":
            raise RuntimeError("diverged")
        return real(c, h, ex, cfg, seed)

    monkeypatch.setattr(pipeline, "run_experiment", flaky)
    out = tmp_path / "p"
    assert run("vqe", *BASE, "--out", str(out)) == cli.EXIT_PARTIAL
    manifest = json.loads((out / "manifest_vqe.json").read_text())
    assert len(manifest["failures"]) == 3
    assert {r["hamiltonian_id"] for r in pipeline.read_csv(out / "vqe_aggregate.csv")} == {"maxcut_00"}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hamexpr.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "noise-sweep" in proc.stdout
