"""Numba and numpy kernel backends must agree bitwise.

Node randomness is keyed by hashed node ids and every comparison-deciding
float expression is mirrored between the implementations, so the two
backends are expected to produce identical trees, path lengths, leaf values
and distances, not merely close ones.
"""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from asebag.kernels import numpy_impl

numba_impl = pytest.importorskip("asebag.kernels.numba_impl")


def random_problem(seed, n=300, d=6):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    y = rng.integers(0, 2, n)
    return X, y, rng


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_iforest_depths_identical(seed):
    X, _, rng = random_problem(seed)
    T, m = 20, 64
    sub_idx = np.vstack([rng.choice(X.shape[0], size=m, replace=False)
                         for _ in range(T)])
    tree_seeds = rng.integers(0, 2**63, size=T).astype(np.uint64)
    adjust = np.arange(m + 1, dtype=np.float64) * 0.37  # any table works
    results = []
    for impl in (numpy_impl, numba_impl):
        forest = impl.build_iforest(X, sub_idx, 6, tree_seeds)
        results.append(impl.iforest_depth_sum(*forest[:5], adjust, X))
    assert np.array_equal(results[0], results[1])


def test_iforest_tree_structures_identical():
    # same multiset of (feature, threshold) splits per tree, slot order aside
    X, _, rng = random_problem(7, n=200, d=4)
    sub_idx = np.vstack([rng.choice(200, size=128, replace=False) for _ in range(5)])
    tree_seeds = rng.integers(0, 2**63, size=5).astype(np.uint64)
    f_np, t_np, *_ , c_np = numpy_impl.build_iforest(X, sub_idx, 7, tree_seeds)
    f_nb, t_nb, *_ , c_nb = numba_impl.build_iforest(X, sub_idx, 7, tree_seeds)
    assert np.array_equal(c_np, c_nb)
    for t in range(5):
        splits_np = sorted((int(f), float(v)) for f, v in
                           zip(f_np[t], t_np[t]) if f >= 0)
        splits_nb = sorted((int(f), float(v)) for f, v in
                           zip(f_nb[t], t_nb[t]) if f >= 0)
        assert splits_np == splits_nb


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_cart_identical(seed):
    X, y, rng = random_problem(seed, n=250, d=5)
    # a mix of continuous and heavily tied integer features
    X[:, 2] = rng.integers(0, 4, X.shape[0])
    probe = rng.standard_normal((80, 5))
    tree_np = numpy_impl.cart_build(X, y, 8)
    tree_nb = numba_impl.cart_build(X, y, 8)
    # preorder slot layout matches exactly
    for a, b in zip(tree_np, tree_nb):
        assert np.array_equal(a, b)
    assert np.array_equal(numpy_impl.cart_apply(*tree_np, probe),
                          numba_impl.cart_apply(*tree_nb, probe))


@pytest.mark.parametrize("impl", [numpy_impl, numba_impl])
def test_splits_strictly_inside_node_range(impl):
    # every internal node's threshold lies strictly between the min and max
    # of its split feature over the build samples that reached the node
    X, _, rng = random_problem(23, n=300, d=5)
    X[:, 3] = np.round(X[:, 3])  # ties make degenerate ranges likelier
    sub_idx = np.vstack([rng.choice(300, size=128, replace=False) for _ in range(8)])
    seeds = rng.integers(0, 2**63, size=8).astype(np.uint64)
    features, thresholds, lefts, rights, sizes, counts = impl.build_iforest(
        X, sub_idx, 7, seeds)

    for t in range(8):
        def walk(slot, rows):
            f = features[t, slot]
            if f < 0:
                assert sizes[t, slot] == rows.size
                return
            vals = X[rows, f]
            v = thresholds[t, slot]
            assert vals.min() < v < vals.max()
            go_left = vals < v
            assert go_left.any() and (~go_left).any()
            walk(lefts[t, slot], rows[go_left])
            walk(rights[t, slot], rows[~go_left])

        walk(0, sub_idx[t])


@pytest.mark.parametrize("exclude_self", [False, True])
def test_kth_distances_identical(exclude_self):
    X, _, rng = random_problem(11, n=150, d=5)
    query = X if exclude_self else rng.standard_normal((60, 5))
    a = numpy_impl.kth_neighbor_distances(X, query, 7, exclude_self)
    b = numba_impl.kth_neighbor_distances(X, query, 7, exclude_self)
    assert np.array_equal(a, b)


def test_full_pipeline_identical_across_backends(tmp_path):
    # end-to-end: the CLI benchmark report must agree bitwise modulo timings
    data = tmp_path / "data.csv"
    base = ["benchmark", "--data", str(data), "--label-column", "label",
            "--positive-label", "1", "--members", "4", "--trees", "20",
            "--seed", "13"]
    env = dict(os.environ)
    subprocess.run(
        [sys.executable, "-m", "asebag.cli", "gen-synth", "--negatives", "250",
         "--positives", "25", "--dim", "4", "--separation", "2.0",
         "--seed", "3", "--output", str(data)],
        check=True, env=env)
    reports = {}
    for backend in ("0", "1"):
        out = tmp_path / f"report_{backend}.json"
        env["ASE_NUMBA"] = backend
        proc = subprocess.run(
            [sys.executable, "-m", "asebag.cli", *base, "--output", str(out)],
            env=env, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        payload = json.loads(out.read_text())
        backend_name = payload.pop("backend")
        payload.pop("timings")
        reports[backend_name] = json.dumps(payload, sort_keys=True)
    assert reports["numpy"] == reports["numba"]
