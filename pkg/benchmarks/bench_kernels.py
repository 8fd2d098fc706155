#!/usr/bin/env python3
"""Benchmark the hot kernels on both backends (numba jit vs pure numpy).

Sizes mirror a realistic backtest day: a one-year weekday window (364
training pairs), 24-point curves, 500 bootstrap replicates, 20 depth
projections over the replicate set.

    python3 benchmarks/bench_kernels.py [--repeats 30]
"""

import argparse
import time

import numpy as np

from curveband import _kernels as K


def time_call(fn, *args, repeats):
    fn(*args)  # warm-up (includes jit compilation on the numba path)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=30)
    parser.add_argument("--n", type=int, default=364, help="training pairs")
    parser.add_argument("--tau", type=int, default=24, help="grid points")
    parser.add_argument("--b", type=int, default=500, help="bootstrap replicates")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    feats = rng.standard_normal((args.n, 4))
    resp = rng.standard_normal((args.n, args.tau))
    weights = rng.random(args.n)
    weights /= weights.sum()
    idx = rng.integers(0, args.n, size=(args.b, args.n))
    proj = rng.standard_normal((20, args.b))
    k_grid = np.array([16, 32, 64, 128], dtype=np.int64)
    ones = np.ones(args.n)

    cases = [
        ("pairwise_dists", K.pairwise_dists, (feats,)),
        ("query_dists", K.query_dists, (feats, feats[0])),
        ("tukey_depths", K.tukey_depths, (proj,)),
        (
            "loo_cv_scores",
            lambda f: K.loo_cv_scores(K.pairwise_dists(f), resp, k_grid, ones, 1.0),
            (feats,),
        ),
        ("resample_weighted_sums", K.resample_weighted_sums, (weights, resp, idx)),
    ]

    backends = K.available_backends()
    results = {}
    for backend in backends:
        K.set_backend(backend)
        for name, fn, call_args in cases:
            results[(name, backend)] = time_call(fn, *call_args, repeats=args.repeats)
    K.set_backend(None)

    width = max(len(name) for name, _, _ in cases)
    header = f"{'kernel':<{width}}  " + "  ".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, _, _ in cases:
        row = f"{name:<{width}}  "
        row += "  ".join(f"{results[(name, b)] * 1e3:>10.3f}ms" for b in backends)
        if len(backends) == 2:
            ratio = results[(name, "numpy")] / results[(name, "numba")]
            row += f"  {ratio:>7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
