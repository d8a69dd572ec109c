#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Runs the same tree-growth, tree-prediction, and SMO workloads through both
backends (the outputs are bit-identical; only the wall time differs) and a
small end-to-end protocol slice through whichever backend is active.

Usage: python benchmarks/bench_kernels.py [--trees 200] [--n 120]
"""

import argparse
import time

import numpy as np

from lifespace.learn import _core, _core_py  # noqa: F401  (probe below)
from lifespace.learn.tree import log2_table, presort


def have_compiled():
    try:
        from lifespace.learn import _core  # noqa: F811
        return _core.BACKEND_NAME == "compiled"
    except ImportError:
        return False


def bench_tree(core, X, y, order, table, n_trees, mtry, seeds, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        core.grow_forest(X, y, None, order, table, n_trees, mtry, 1.0, True,
                         seeds)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_predict(core, forest, probes, repeats=3):
    feat, thr, left, right, _, w0, w1, offs = forest
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        core.predict_trees(feat, thr, left, right, w0, w1, offs, probes)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_smo(core, K, y_pm, C, repeats=3):
    best = float("inf")
    iters = 0
    for _ in range(repeats):
        t0 = time.perf_counter()
        _, _, iters, converged, _ = core.smo_train(K, y_pm, C, 1e-3,
                                                   20_000_000, False)
        assert converged
        best = min(best, time.perf_counter() - t0)
    return best, iters


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trees", type=int, default=200)
    parser.add_argument("--n", type=int, default=120)
    parser.add_argument("--p", type=int, default=12)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    X = rng.normal(size=(args.n, args.p))
    y = (rng.random(args.n) < 0.4).astype(np.int8)
    y[:2] = [0, 1]
    order = presort(X)
    table = log2_table(args.n)
    seeds = rng.integers(0, 2 ** 63, size=args.trees, dtype=np.uint64)
    probes = rng.normal(size=(30, args.p))

    Z = (X - X.mean(0)) / X.std(0, ddof=1)
    K = Z @ Z.T
    y_pm = 2.0 * y.astype(np.float64) - 1.0

    from lifespace.learn import _core_py as py
    backends = [("python", py)]
    if have_compiled():
        from lifespace.learn import _core as comp
        backends.insert(0, ("compiled", comp))
    else:
        print("compiled backend not available; benchmarking the fallback only")

    rows = []
    for name, core in backends:
        t_grow = bench_tree(core, X, y, order, table, args.trees, 3, seeds)
        forest = core.grow_forest(X, y, None, order, table, args.trees, 3,
                                  1.0, True, seeds)
        t_pred = bench_predict(core, forest, probes)
        t_smo, iters = bench_smo(core, K, y_pm, 10.0)
        rows.append((name, t_grow, t_pred, t_smo, iters))

    print(f"\nworkload: {args.trees} bootstrap trees (n={args.n}, p={args.p}, "
          f"mtry=3), 30-row predict, SMO linear C=10")
    print(f"{'backend':<10} {'grow':>12} {'us/tree':>9} {'predict':>10} "
          f"{'smo':>10} {'smo iters':>10}")
    for name, t_grow, t_pred, t_smo, iters in rows:
        print(f"{name:<10} {t_grow:>10.4f}s {1e6 * t_grow / args.trees:>9.0f} "
              f"{t_pred:>9.4f}s {t_smo:>9.4f}s {iters:>10}")
    if len(rows) == 2:
        print(f"\nspeedup (compiled vs python): grow "
              f"{rows[1][1] / rows[0][1]:.0f}x, predict "
              f"{rows[1][2] / rows[0][2]:.0f}x, smo "
              f"{rows[1][3] / rows[0][3]:.0f}x")


if __name__ == "__main__":
    main()
