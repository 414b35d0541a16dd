"""Compiled vs pure-Python kernel timings.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--pairs 2048]

Times ``pair_terms`` (the frame-potential inner loop), ``unitaries`` and
``trace_terms`` on catalog templates for each available back end, and checks that
both back ends return the same numbers.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from hamexpr import kernels
from hamexpr.circuits import build_template
from hamexpr.dataset import DatasetSpec, build_dataset


def bench(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--pairs", type=int, default=2048)
    args = ap.parse_args(argv)

    n = 4
    hams = build_dataset(DatasetSpec(), 0)[::12]
    batch = kernels.HamiltonianBatch.from_matrices([h.matrix for h in hams])
    rng = np.random.default_rng(0)
    backends = sorted(kernels.BACKENDS)
    print(f"back ends: {backends}; default {kernels.DEFAULT_BACKEND}; {args.pairs} pairs, {len(hams)} Hamiltonians")
    print(f"{'case':<28}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}{'max diff':>12}")
    for tid, layers in (("circuit_02", 1), ("circuit_05", 2), ("hea_linear", 3)):
        prog = kernels.compile_template(build_template(tid, n, layers))
        ta, tb = rng.uniform(0, 2 * np.pi, size=(2, args.pairs, prog.n_params))
        a = kernels.pair_products(prog, ta, tb)
        cases = {
            "unitaries": lambda b: kernels.unitaries(prog, ta, b),
            "trace_terms": lambda b: kernels.trace_terms(a, batch, b),
            "pair_terms": lambda b: kernels.pair_terms(prog, ta, tb, batch, b),
        }
        for name, fn in cases.items():
            times = {b: bench(lambda: fn(b), args.repeat) for b in backends}
            outs = [fn(b) for b in backends]
            diff = max(float(np.max(np.abs(o - outs[0]))) for o in outs)
            speed = times["python"] / times["compiled"] if "compiled" in times else 1.0
            label = f"{tid} L={layers} {name}"
            print(f"{label:<28}" + "".join(f"{times[b] * 1e3:>10.1f}ms" for b in backends) + f"{speed:>9.1f}x{diff:>12.1e}")


if __name__ == "__main__":
    main()
