"""Acceptance gate: one test per criterion, one printed PASS/FAIL line each.

Criteria 1 and 2 run against the UCI white wine-quality dataset, which this
package cannot download itself. Provide it via the ASE_WINE_CSV environment
variable or at data/winequality-white.csv (semicolon-delimited original is
fine); without it those two tests skip with instructions and the same trend
assertions run on a synthetic stand-in at stand-in thresholds.

Run with `pytest tests/test_acceptance.py -s` to see the status lines.
"""

import json
import math
import os
import time
from pathlib import Path

import numpy as np
import pytest

from asebag.core import Dataset, confusion, metrics, stratified_split
from asebag.datasets import CsvSchema, SynthSpec, generate_synth, load_csv
from asebag.ensemble import AseConfig, combine_scores, train_ase
from asebag.harness import evaluate_scores, run_ablation, run_benchmark
from asebag.learners import fit_tree, logistic_loss_and_grad
from asebag.report import dumps_report, strip_timings
from asebag.sampler import (
    BinPartition,
    build_subset,
    compute_asw,
    compute_d,
    compute_n,
    split_bins,
)
from asebag.weighting import cew, contamination_c, entropy_e
from conftest import auc_pairwise, clustered_minority

from asebag import kernels

WINE_ENV = "ASE_WINE_CSV"

# Runtime budgets are stated for the default (numba) backend; the pure-numpy
# fallback is a correctness path and gets a relaxed budget, printed as such.
TIME_SCALE = 5.0 if kernels.BACKEND == "numpy" else 1.0
WINE_DEFAULT = Path(__file__).resolve().parent.parent / "data" / "winequality-white.csv"
WINE_HELP = (
    "wine-quality CSV not found; fetch it with\n"
    "  mkdir -p data && curl -o data/winequality-white.csv "
    "https://archive.ics.uci.edu/ml/machine-learning-databases/wine-quality/"
    "winequality-white.csv\n"
    f"or point {WINE_ENV} at an existing copy"
)


def check(criterion: str, ok: bool, detail: str = "") -> None:
    print(f"\n[acceptance] {criterion}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, f"{criterion}: {detail}"


def wine_dataset() -> Dataset:
    path = os.environ.get(WINE_ENV) or WINE_DEFAULT
    path = Path(path)
    if not path.exists():
        pytest.skip(WINE_HELP)
    first_line = path.read_text(encoding="utf-8").splitlines()[0]
    delimiter = ";" if ";" in first_line else ","
    schema = CsvSchema(label_column="quality", positive_predicate=(">=", 7.0),
                       delimiter=delimiter)
    return load_csv(path, schema)


def wine_like_synth(seed: int = 100) -> Dataset:
    # stand-in at wine scale: 11 features, IR ~26, minority pockets on the
    # majority's rim so the classes overlap heavily
    return clustered_minority(negatives=4700, positives=180, dim=11,
                              radius=2.2, cluster_std=0.6, n_clusters=12,
                              seed=seed)


class TestCriterion1BenchmarkTrend:
    CONFIG = AseConfig(bins=5, members=50, max_depth=10, seed=0)

    def _trend(self, ds, label, f1_floor, ratio_floor):
        t0 = time.perf_counter()
        out = run_benchmark(ds, self.CONFIG, repeats=10,
                            models=("ase", "plain"))
        elapsed = time.perf_counter() - t0
        ase = out["means"]["ase"]
        plain = out["means"]["plain"]
        detail = (f"ASE f1={ase['f1']:.3f} auc={ase['auc']:.3f} | "
                  f"DT f1={plain['f1']:.3f} auc={plain['auc']:.3f} | {elapsed:.0f}s")
        ok = (ase["f1"] >= f1_floor
              and ase["f1"] >= ratio_floor * plain["f1"]
              and ase["auc"] >= plain["auc"] + 0.05
              and elapsed < 180.0 * TIME_SCALE)
        check(label, ok, detail)

    def test_wine_benchmark_trend(self):
        self._trend(wine_dataset(), "criterion 1 (wine benchmark trend)",
                    f1_floor=0.35, ratio_floor=1.5)

    def test_synthetic_standin_trend(self):
        # supplementary: same trend on synthetic wine-scale data; absolute F1
        # floors belong to the real dataset, the stand-in asserts the margins
        self._trend(wine_like_synth(), "criterion 1s (synthetic stand-in trend)",
                    f1_floor=0.10, ratio_floor=1.4)


class TestCriterion2AblationOrdering:
    CONFIG = AseConfig(bins=5, members=20, max_depth=10, seed=0)

    def test_wine_ablation_ordering(self):
        ds = wine_dataset()
        t0 = time.perf_counter()
        out = run_ablation(ds, self.CONFIG, repeats=10)
        elapsed = time.perf_counter() - t0
        means = {v: out["means"][v]["f1"] for v in out["variants"]}
        detail = " ".join(f"{v}={f1:.3f}" for v, f1 in means.items()) + f" | {elapsed:.0f}s"
        ok = (means["full"] >= means["no_both"] + 0.02
              and means["full"] >= means["no_asw"] - 0.01
              and means["full"] >= means["no_cew"] - 0.01
              and elapsed < 180.0 * TIME_SCALE)
        check("criterion 2 (wine ablation ordering)", ok, detail)

    def test_synthetic_standin_ablation_runs(self):
        # supplementary: the ordering needs real data structure; the stand-in
        # asserts all variants complete and land in a sane band
        ds = wine_like_synth()
        t0 = time.perf_counter()
        out = run_ablation(ds, self.CONFIG, repeats=3)
        elapsed = time.perf_counter() - t0
        means = {v: out["means"][v]["f1"] for v in out["variants"]}
        detail = " ".join(f"{v}={f1:.3f}" for v, f1 in means.items()) + f" | {elapsed:.0f}s"
        ok = all(0.0 <= f1 <= 1.0 for f1 in means.values()) and \
            max(means.values()) - min(means.values()) < 0.25 and elapsed < 180.0 * TIME_SCALE
        check("criterion 2s (synthetic stand-in ablation)", ok, detail)


class TestCriterion3FormulaOracles:
    def test_formula_oracles(self):
        part = BinPartition(k=3)
        for size in (2, 4, 8):
            members = np.arange(size, dtype=np.int64)
            part.bins.append(members)
            part.majority_bins.append(members)
        asw = compute_asw(part)
        asw_ok = np.allclose(asw, [1 / 6, 1 / 3, 1 / 2], atol=1e-12, rtol=0)

        d = compute_d(k=2, c=0.5)
        d_ok = np.allclose(d, [4.0, 4.0], atol=1e-9, rtol=0)

        from asebag.core import ConfusionMatrix
        c_val = contamination_c(ConfusionMatrix(tp=9, fn=1, fp=0, tn=0), 10)
        c_ok = abs(c_val - math.log(10.0)) <= 1e-12

        e_val = entropy_e(ConfusionMatrix(tp=6, fn=0, fp=6, tn=0))
        e_ok = abs(e_val - math.log(2.0)) <= 1e-12

        zero = cew(ConfusionMatrix(tp=0, fn=10, fp=4, tn=20), 10).cew
        zero_ok = zero == 0.0

        detail = (f"asw={asw_ok} d={d_ok} C={c_ok} E={e_ok} cew0={zero_ok}")
        check("criterion 3 (formula oracles)",
              asw_ok and d_ok and c_ok and e_ok and zero_ok, detail)


class TestCriterion4PropertySuites:
    N_CASES = 1000

    def test_bin_partition_property(self):
        rng = np.random.default_rng(40)
        for _ in range(self.N_CASES):
            n = int(rng.integers(1, 200))
            k = int(rng.integers(2, 11))
            scores = rng.random(n)
            labels = rng.integers(0, 2, n)
            part = split_bins(scores, labels, k)
            merged = np.concatenate(part.bins)
            assert merged.size == n
            assert np.array_equal(np.sort(merged), np.arange(n))
        check("criterion 4a (bin partition property)", True, f"{self.N_CASES} cases")

    def test_asw_property(self):
        rng = np.random.default_rng(41)
        for _ in range(self.N_CASES):
            n = int(rng.integers(2, 300))
            k = int(rng.integers(2, 11))
            part = split_bins(rng.random(n), rng.integers(0, 2, n), k)
            asw = compute_asw(part)
            assert np.all(asw >= 0.0)
            assert abs(asw.sum() - 1.0) <= 1e-9
        check("criterion 4b (asw nonnegative, sums to 1)", True, f"{self.N_CASES} cases")

    def test_n_caps_property(self):
        rng = np.random.default_rng(42)
        for _ in range(self.N_CASES):
            n = int(rng.integers(5, 300))
            k = int(rng.integers(2, 9))
            labels = rng.integers(0, 2, n)
            part = split_bins(rng.random(n), labels, k)
            compute_asw(part)
            part.d = compute_d(k, float(rng.uniform(0.05, 0.4)))
            counts = compute_n(part, int((labels == 0).sum()))
            assert np.all(counts <= part.majority_per_bin)
            assert np.all(counts >= 0)
        check("criterion 4c (n within per-bin majority)", True, f"{self.N_CASES} cases")

    def test_subset_minority_property(self):
        rng = np.random.default_rng(43)
        for case in range(self.N_CASES):
            n_neg = int(rng.integers(6, 60))
            n_pos = int(rng.integers(2, 10))
            X = rng.standard_normal((n_neg + n_pos, 3))
            y = np.r_[np.zeros(n_neg, dtype=int), np.ones(n_pos, dtype=int)]
            train = Dataset(X, y)
            k = int(rng.integers(2, 6))
            part = split_bins(rng.random(train.n), train.y, k)
            compute_asw(part)
            part.d = compute_d(k, float(rng.uniform(0.05, 0.4)))
            compute_n(part, n_neg)
            subset = build_subset(part, train, seed=case)
            pos_rows = subset.X[subset.y == 1]
            assert np.array_equal(np.sort(pos_rows, axis=0),
                                  np.sort(X[y == 1], axis=0))
            neg_rows = subset.X[subset.y == 0]
            assert len(np.unique(neg_rows, axis=0)) == len(neg_rows)
        check("criterion 4d (subsets keep all minority exactly once)", True,
              f"{self.N_CASES} cases")

    def test_convex_combination_property(self):
        rng = np.random.default_rng(44)
        for _ in range(self.N_CASES):
            b = int(rng.integers(1, 9))
            n = int(rng.integers(1, 15))
            S = rng.random((b, n))
            w = rng.random(b) * (rng.random() > 0.05)
            out = combine_scores(S, w)
            assert np.all(out >= S.min(axis=0) - 1e-12)
            assert np.all(out <= S.max(axis=0) + 1e-12)
        check("criterion 4e (ensemble score convex)", True, f"{self.N_CASES} cases")

    def test_auc_oracle_property(self):
        rng = np.random.default_rng(45)
        from asebag.core import auc_score
        for _ in range(self.N_CASES):
            n = int(rng.integers(2, 201))
            labels = rng.integers(0, 2, n)
            if rng.random() < 0.5:
                scores = rng.random(n)
            else:
                scores = rng.integers(0, 5, n) / 4.0  # force ties
            expected = auc_pairwise(scores, labels)
            got = auc_score(scores, labels)
            if expected is None:
                assert got is None
            else:
                assert abs(got - expected) <= 1e-12
        check("criterion 4f (auc equals pairwise oracle)", True, f"{self.N_CASES} cases")


class TestCriterion5GradientCheck:
    def test_gradient_check(self):
        rng = np.random.default_rng(50)
        step = 1e-5
        worst = 0.0
        for _ in range(100):
            n = int(rng.integers(2, 30))
            d = int(rng.integers(1, 6))
            X = rng.standard_normal((n, d))
            y = rng.integers(0, 2, n).astype(float)
            w = rng.standard_normal(d)
            b = float(rng.standard_normal())
            _, grad_w, grad_b = logistic_loss_and_grad(w, b, X, y)
            for j in range(d):
                wp, wm = w.copy(), w.copy()
                wp[j] += step
                wm[j] -= step
                lp, _, _ = logistic_loss_and_grad(wp, b, X, y)
                lm, _, _ = logistic_loss_and_grad(wm, b, X, y)
                numeric = (lp - lm) / (2 * step)
                rel = abs(grad_w[j] - numeric) / max(1.0, abs(numeric))
                worst = max(worst, rel)
            lp, _, _ = logistic_loss_and_grad(w, b + step, X, y)
            lm, _, _ = logistic_loss_and_grad(w, b - step, X, y)
            numeric = (lp - lm) / (2 * step)
            worst = max(worst, abs(grad_b - numeric) / max(1.0, abs(numeric)))
        check("criterion 5 (logistic gradient vs finite differences)",
              worst <= 1e-6, f"worst relative error {worst:.2e} over 100 instances")


class TestCriterion6Determinism:
    def test_byte_identical_reports(self):
        ds = generate_synth(SynthSpec(negatives=250, positives=25, dim=4,
                                      separation=2.0, seed=9))
        config = AseConfig(members=6, trees=25, seed=21)
        texts = []
        for _ in range(2):
            out = run_benchmark(ds, config, repeats=2)
            texts.append(dumps_report(strip_timings(out)))
        ok = texts[0] == texts[1]
        check("criterion 6 (byte-identical reports modulo timings)", ok,
              f"{len(texts[0])} bytes compared")


class TestCriterion7SyntheticSanity:
    def test_synthetic_sanity(self):
        t0 = time.perf_counter()
        config = AseConfig(members=50, seed=0)
        means = {}
        for sep in (0.0, 6.0):
            aucs = []
            for seed in range(10):
                ds = generate_synth(SynthSpec(negatives=1000, positives=50, dim=5,
                                              separation=sep, seed=700 + seed))
                train, test = stratified_split(ds, 0.8, seed=seed)
                model = train_ase(train, AseConfig(members=50, seed=seed))
                ms, _ = evaluate_scores(model.predict_scores(test.X), test)
                aucs.append(ms.auc)
            means[sep] = float(np.mean(aucs))
        elapsed = time.perf_counter() - t0
        ok = 0.4 <= means[0.0] <= 0.6 and means[6.0] >= 0.95 and elapsed < 60.0 * TIME_SCALE
        check("criterion 7 (synthetic sanity)",
              ok, f"auc@sep0={means[0.0]:.3f} auc@sep6={means[6.0]:.3f} | {elapsed:.0f}s")


class TestCriterion8DegenerateSurvival:
    def _valid_report(self, out):
        # serializes, and every stored metric recomputes from its own evidence
        text = dumps_report(out)
        payload = json.loads(text)
        for run in payload["runs"]:
            labels = np.array(run["test_labels"])
            for entry in run["models"].values():
                scores = np.array(entry["scores"])
                cm = confusion(labels, (scores >= 0.5).astype(int))
                assert cm.as_dict() == entry["confusion"]
                recomputed = metrics(cm, scores, labels)
                for key, value in entry["metrics"].items():
                    got = getattr(recomputed, key)
                    if value is None:
                        assert got is None
                    else:
                        assert abs(got - value) <= 1e-12
        return True

    def test_degenerate_inputs_survive(self):
        rng = np.random.default_rng(80)
        ok = True

        # all-identical features (also: one distinct score, so bins collapse
        # and k exceeds the distinct-score count)
        X = np.full((200, 3), 2.0)
        y = np.r_[np.zeros(180, dtype=int), np.ones(20, dtype=int)]
        constant = Dataset(X, y)
        out = run_benchmark(constant, AseConfig(members=5, trees=10, bins=7, seed=1),
                            repeats=1)
        ok &= self._valid_report(out)

        # contamination pinned at both schedule extremes
        overlap = generate_synth(SynthSpec(negatives=150, positives=15, dim=3,
                                           separation=1.0, seed=2))
        for c in (0.05, 0.40):
            out = run_benchmark(overlap, AseConfig(members=4, trees=10, c_min=c,
                                                   c_max=c, seed=3), repeats=1)
            ok &= self._valid_report(out)

        # single-class training subsets must yield constant classifiers
        pure = Dataset(rng.standard_normal((12, 2)), np.zeros(12, dtype=int))
        tree = fit_tree(pure, max_depth=4)
        ok &= bool(np.all(tree.scores(rng.standard_normal((5, 2))) == 0.0))

        check("criterion 8 (degenerate-input survival)", ok,
              "constant features, c extremes, k>distinct scores, pure subsets")
