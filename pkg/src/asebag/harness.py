"""Benchmark, ablation and convergence-curve experiment drivers.

Every run repeats the same recipe per seed: a stratified 80/20 (by default)
split, model training on the train side, evaluation on the test side. Seeds
for the split and for model training are derived from the base seed and the
repeat index, so a report fully determines its own reproduction.
"""

from __future__ import annotations

import time
from dataclasses import replace

import numpy as np

from . import kernels, report
from ._rng import STREAM_MODEL, STREAM_SPLIT, derive_seed
from .core import Dataset, confusion, metrics, stratified_split
from .ensemble import (
    AseConfig,
    combine_scores,
    make_classifier,
    train_ablated,
    train_ase,
    train_underbagging,
)

BENCHMARK_MODELS = ("ase", "plain", "underbagging")
ABLATION_VARIANTS = ("full", "no_asw", "no_cew", "no_both")


def evaluate_scores(scores: np.ndarray, test: Dataset):
    """Confusion at threshold 0.5 plus the full metric set."""
    cm = confusion(test.y, (scores >= 0.5).astype(np.int64))
    return metrics(cm, scores, test.y), cm


def _split_info(ds: Dataset) -> dict:
    return {"rows": ds.n, "positives": ds.positive_count, "negatives": ds.negative_count}


def _base_report(command: str, config: AseConfig, train_fraction: float,
                 repeats: int, dataset_info: dict) -> dict:
    return {
        "schema_version": report.SCHEMA_VERSION,
        "command": command,
        "backend": kernels.BACKEND,
        "config": config.as_dict(),
        "train_fraction": train_fraction,
        "repeats": repeats,
        "dataset": dataset_info,
    }


def run_benchmark(ds: Dataset, config: AseConfig, *, repeats: int = 1,
                  train_fraction: float = 0.8,
                  models: tuple = BENCHMARK_MODELS,
                  dataset_info: dict | None = None) -> dict:
    """Train and evaluate the requested models over `repeats` splits."""
    out = _base_report("benchmark", config, train_fraction, repeats,
                       dataset_info or {})
    out["models"] = list(models)
    runs = []
    timing_runs = []
    t_start = time.perf_counter()
    for r in range(repeats):
        split_seed = derive_seed(config.seed, STREAM_SPLIT, r)
        model_seed = derive_seed(config.seed, STREAM_MODEL, r)
        train, test = stratified_split(ds, train_fraction, split_seed)
        cfg = replace(config, seed=model_seed)
        entry = {
            "repeat": r,
            "split_seed": split_seed,
            "model_seed": model_seed,
            "train": _split_info(train),
            "test": _split_info(test),
            "test_labels": test.y,
            "models": {},
        }
        run_timing = {}
        for name in models:
            t0 = time.perf_counter()
            members = None
            stages = None
            if name == "ase":
                model = train_ase(train, cfg)
                t1 = time.perf_counter()
                scores = model.predict_scores(test.X)
                members = [report.member_provenance(m, i)
                           for i, m in enumerate(model.members)]
                stages = dict(model.stage_seconds)
            elif name == "underbagging":
                model = train_underbagging(train, cfg.members, model_seed, cfg)
                t1 = time.perf_counter()
                scores = model.predict_scores(test.X)
            elif name == "plain":
                clf = make_classifier(cfg).fit(train.X, train.y)
                t1 = time.perf_counter()
                scores = clf.scores(test.X)
            else:
                raise ValueError(f"unknown model {name!r}")
            t2 = time.perf_counter()
            metric_set, cm = evaluate_scores(scores, test)
            entry["models"][name] = report.model_entry(metric_set, cm, scores, members)
            run_timing[name] = {
                "fit_seconds": t1 - t0,
                "evaluate_seconds": t2 - t1,
            }
            if stages:
                run_timing[name]["stages"] = stages
        runs.append(report.to_jsonable(entry))
        timing_runs.append(run_timing)
    out["runs"] = runs
    out["means"] = report.metric_means(runs, list(models))
    out["timings"] = {"runs": timing_runs,
                      "total_seconds": time.perf_counter() - t_start}
    return out


def run_ablation(ds: Dataset, config: AseConfig, *, repeats: int = 1,
                 train_fraction: float = 0.8,
                 variants: tuple = ABLATION_VARIANTS,
                 dataset_info: dict | None = None) -> dict:
    """Train the requested ablation variants over `repeats` splits."""
    out = _base_report("ablate", config, train_fraction, repeats,
                       dataset_info or {})
    out["variants"] = list(variants)
    runs = []
    timing_runs = []
    t_start = time.perf_counter()
    for r in range(repeats):
        split_seed = derive_seed(config.seed, STREAM_SPLIT, r)
        model_seed = derive_seed(config.seed, STREAM_MODEL, r)
        train, test = stratified_split(ds, train_fraction, split_seed)
        cfg = replace(config, seed=model_seed)
        entry = {
            "repeat": r,
            "split_seed": split_seed,
            "model_seed": model_seed,
            "train": _split_info(train),
            "test": _split_info(test),
            "test_labels": test.y,
            "models": {},
        }
        run_timing = {}
        for variant in variants:
            t0 = time.perf_counter()
            if variant == "full":
                model = train_ase(train, cfg)
            else:
                model = train_ablated(train, cfg, variant)
            t1 = time.perf_counter()
            scores = model.predict_scores(test.X)
            t2 = time.perf_counter()
            metric_set, cm = evaluate_scores(scores, test)
            members = [report.member_provenance(m, i)
                       for i, m in enumerate(model.members)]
            entry["models"][variant] = report.model_entry(metric_set, cm, scores, members)
            run_timing[variant] = {
                "fit_seconds": t1 - t0,
                "evaluate_seconds": t2 - t1,
                "stages": dict(model.stage_seconds),
            }
        runs.append(report.to_jsonable(entry))
        timing_runs.append(run_timing)
    out["runs"] = runs
    out["means"] = report.metric_means(runs, list(variants))
    out["timings"] = {"runs": timing_runs,
                      "total_seconds": time.perf_counter() - t_start}
    return out


def run_curve(ds: Dataset, config: AseConfig, *, max_members: int,
              train_fraction: float = 0.8,
              dataset_info: dict | None = None) -> dict:
    """Metrics of every prefix ensemble of a single trained model.

    Trains once with `max_members` members, then evaluates the partial
    ensembles at member counts 1..max_members on the test split. The final
    point coincides with a benchmark run at the same seed and member count.
    """
    if max_members < 1:
        raise ValueError("max_members must be at least 1")
    config = replace(config, members=max_members)
    out = _base_report("curve", config, train_fraction, 1, dataset_info or {})
    t_start = time.perf_counter()
    split_seed = derive_seed(config.seed, STREAM_SPLIT, 0)
    model_seed = derive_seed(config.seed, STREAM_MODEL, 0)
    train, test = stratified_split(ds, train_fraction, split_seed)
    model = train_ase(train, replace(config, seed=model_seed))
    score_matrix = model.member_scores(test.X)
    weights = model.weights
    series = []
    for m in range(1, max_members + 1):
        scores = combine_scores(score_matrix[:m], weights[:m])
        metric_set, _ = evaluate_scores(scores, test)
        series.append({"members": m, "auc": metric_set.auc, "f1": metric_set.f1})
    out["split_seed"] = split_seed
    out["model_seed"] = model_seed
    out["series"] = series
    out["timings"] = {"total_seconds": time.perf_counter() - t_start}
    return out
