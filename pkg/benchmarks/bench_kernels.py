"""Benchmark: compiled kernels vs the pure-Python fallback.

Micro-benchmarks time both implementations in-process; the end-to-end
model-training comparison runs subprocesses so each side goes through
the normal import-time kernel selection (PASSNET_LAB_PURE_PYTHON=1
forces the fallback).

Usage: python benchmarks/bench_kernels.py [--quick]
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from passnet_lab import _kernels_py

try:
    from passnet_lab import _kernels as compiled
except ImportError:
    compiled = None


def time_call(fn, *args, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def micro_benchmarks(n: int, repeats: int) -> None:
    rng = np.random.default_rng(0)
    values = np.sort(rng.normal(size=n))
    labels = rng.integers(0, 2, n).astype(np.int64)
    targets = rng.normal(size=n)
    points = np.ascontiguousarray(rng.normal(size=(n, 8)))
    centroids = np.ascontiguousarray(rng.normal(size=(6, 8)))
    out = np.zeros(n, dtype=np.int64)

    cases = [
        ("best_split_gini", (values, labels, 2, 1)),
        ("best_split_sse", (values, targets, 1)),
        ("kmeans_assign", (points, centroids, out)),
    ]
    print(f"\nmicro-benchmarks (n={n}, best of {repeats}):")
    print(f"{'kernel':<18}{'python':>12}{'compiled':>12}{'speedup':>10}")
    for name, args in cases:
        py = time_call(getattr(_kernels_py, name), *args, repeats=repeats)
        if compiled is None:
            print(f"{name:<18}{py * 1e3:>10.3f}ms{'n/a':>12}{'n/a':>10}")
            continue
        cy = time_call(getattr(compiled, name), *args, repeats=repeats)
        print(f"{name:<18}{py * 1e3:>10.3f}ms{cy * 1e3:>10.3f}ms{py / cy:>9.1f}x")


TRAIN_SNIPPET = """
import time
from passnet_lab import kernels
from passnet_lab.models import ModelFamily, default_spec, train
from passnet_lab.synthetic import make_xor

table = make_xor(n={rows}, seed=3)
start = time.perf_counter()
train(default_spec(ModelFamily.RANDOM_FOREST, seed=1, n_trees={trees}, max_depth=10), table)
train(default_spec(ModelFamily.GRADIENT_BOOSTING, seed=1, n_rounds={rounds}, max_depth=4), table)
print(f"{{kernels.KERNEL_IMPLEMENTATION}}: {{time.perf_counter() - start:.2f}}s")
"""


def training_benchmark(rows: int, trees: int, rounds: int) -> None:
    print(f"\nend-to-end training (forest {trees} trees + boosting {rounds} rounds, {rows} rows):")
    snippet = TRAIN_SNIPPET.format(rows=rows, trees=trees, rounds=rounds)
    for forced in (False, True):
        env = dict(os.environ)
        env.pop("PASSNET_LAB_PURE_PYTHON", None)
        if forced:
            env["PASSNET_LAB_PURE_PYTHON"] = "1"
        subprocess.run([sys.executable, "-c", snippet], env=env, check=True)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller sizes, fewer repeats")
    args = parser.parse_args()

    if compiled is None:
        print("compiled kernels unavailable; showing fallback timings only")

    if args.quick:
        micro_benchmarks(n=2_000, repeats=5)
        training_benchmark(rows=300, trees=30, rounds=30)
    else:
        micro_benchmarks(n=20_000, repeats=9)
        training_benchmark(rows=1_000, trees=150, rounds=150)


if __name__ == "__main__":
    main()
