"""Benchmark the compiled clustering kernels against the NumPy fallback.

Runs both implementations on identical seeded workloads, reports best-of-N
wall times plus speedup, and verifies the outputs agree (max absolute
difference printed per kernel).

Usage: python3 benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from gradmix._kernels import fallback

try:
    from gradmix._kernels import _core
except ImportError:
    _core = None


def best_of(fn, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def bench_assign_points(rng, repeats):
    points = rng.standard_normal((200_000, 32))
    centroids = rng.standard_normal((24, 32))

    rows = []
    outputs = {}
    for name, impl in backends():
        secs, (labels, sqdists) = best_of(
            lambda impl=impl: impl.assign_points(points, centroids), repeats
        )
        rows.append((name, secs))
        outputs[name] = (labels, sqdists)
    report("assign_points (200k x 32, k=24)", rows)
    if len(outputs) == 2:
        a, b = outputs["compiled"], outputs["python"]
        mismatches = int((a[0] != b[0]).sum())
        diff = float(np.abs(a[1] - b[1]).max())
        print(f"  label mismatches: {mismatches}   max |sqdist diff|: {diff:.3e}")


def bench_cluster_mean_distances(rng, repeats):
    points = rng.standard_normal((6_000, 16))
    labels = rng.integers(0, 8, size=6_000)
    sample_idx = rng.choice(6_000, size=2_048, replace=False).astype(np.int64)

    rows = []
    outputs = {}
    for name, impl in backends():
        secs, out = best_of(
            lambda impl=impl: impl.cluster_mean_distances(
                points, labels, 8, sample_idx
            ),
            repeats,
        )
        rows.append((name, secs))
        outputs[name] = out
    report("cluster_mean_distances (6k x 16, 2048 samples, k=8)", rows)
    if len(outputs) == 2:
        diff = float(np.abs(outputs["compiled"] - outputs["python"]).max())
        print(f"  max |distance diff|: {diff:.3e}")


def backends():
    pairs = []
    if _core is not None:
        pairs.append(("compiled", _core))
    pairs.append(("python", fallback))
    return pairs


def report(title, rows):
    print(f"\n{title}")
    base = dict(rows).get("python")
    for name, secs in rows:
        extra = ""
        if name == "compiled" and base:
            extra = f"   ({base / secs:.1f}x vs python)"
        print(f"  {name:>8}: {secs * 1e3:8.2f} ms{extra}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats per kernel (best is kept)")
    args = parser.parse_args()

    if _core is None:
        print("compiled extension not built; timing the NumPy fallback only")
    rng = np.random.default_rng(0)
    bench_assign_points(rng, args.repeats)
    bench_cluster_mean_distances(rng, args.repeats)
    print()


if __name__ == "__main__":
    main()
