#!/usr/bin/env python3
"""Time the numba kernels against the pure-numpy fallback.

Imports both backend modules directly (ignoring the ASE_NUMBA flag), checks
they agree on every output, and reports best-of-N wall times per kernel.

    python benchmarks/bench_kernels.py [--repeat 3] [--json out.json]
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from asebag.kernels import numpy_impl

try:
    from asebag.kernels import numba_impl
except ImportError:
    numba_impl = None


def best_of(fn, repeat):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def build_workloads(rng):
    X_forest = rng.standard_normal((4000, 10))
    sub_idx = np.vstack([rng.choice(4000, size=256, replace=False)
                         for _ in range(100)])
    tree_seeds = rng.integers(0, 2**63, size=100).astype(np.uint64)
    adjust = np.array([0.0 if s <= 1 else 1.0 if s == 2 else
                       2.0 * (np.log(s - 1.0) + np.euler_gamma) - 2.0 * (s - 1.0) / s
                       for s in range(257)])

    X_cart = rng.standard_normal((3000, 10))
    y_cart = (X_cart[:, 0] + 0.5 * rng.standard_normal(3000) > 1.2).astype(np.int64)

    X_knn = rng.standard_normal((2000, 10))

    def make(impl):
        forest = {}

        def iforest_build():
            forest["trees"] = impl.build_iforest(X_forest, sub_idx, 8, tree_seeds)
            return forest["trees"][5]  # node counts, cheap to compare

        def iforest_score():
            return impl.iforest_depth_sum(*forest["trees"][:5], adjust, X_forest)

        cart = {}

        def cart_build():
            cart["tree"] = impl.cart_build(X_cart, y_cart, 10)
            return cart["tree"][0]

        def cart_apply():
            return impl.cart_apply(*cart["tree"], X_cart)

        def knn_kth():
            return impl.kth_neighbor_distances(X_knn, X_knn, 10, True)

        return [
            ("iforest_build (100 trees, psi=256)", iforest_build),
            ("iforest_score (4000 rows x 100 trees)", iforest_score),
            ("cart_build (3000 rows, 10 feats, depth 10)", cart_build),
            ("cart_apply (3000 rows)", cart_apply),
            ("knn_kth (2000 x 2000, k=10)", knn_kth),
        ]

    return make


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3, help="timed repetitions, best kept")
    parser.add_argument("--json", help="also dump results to this path")
    args = parser.parse_args()

    if numba_impl is None:
        print("numba is not importable; nothing to compare against")
        return 1

    rng = np.random.default_rng(0)
    make = build_workloads(rng)
    plans = {"numpy": make(numpy_impl), "numba": make(numba_impl)}

    # warmup: numba JIT compilation and OS caches
    for name, plan in plans.items():
        for _, fn in plan:
            fn()

    rows = []
    for (label, np_fn), (_, nb_fn) in zip(plans["numpy"], plans["numba"]):
        t_np, out_np = best_of(np_fn, args.repeat)
        t_nb, out_nb = best_of(nb_fn, args.repeat)
        match = np.array_equal(np.asarray(out_np), np.asarray(out_nb))
        rows.append({"kernel": label, "numpy_ms": t_np * 1e3,
                     "numba_ms": t_nb * 1e3, "speedup": t_np / t_nb,
                     "outputs_equal": bool(match)})

    width = max(len(r["kernel"]) for r in rows)
    print(f"{'kernel':<{width}}  {'numpy ms':>10}  {'numba ms':>10}  {'speedup':>8}  equal")
    for r in rows:
        print(f"{r['kernel']:<{width}}  {r['numpy_ms']:>10.2f}  {r['numba_ms']:>10.2f}"
              f"  {r['speedup']:>7.1f}x  {r['outputs_equal']}")

    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)
        print(f"\nwrote {args.json}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
