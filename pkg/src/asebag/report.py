"""Run-report assembly and JSON serialization.

Reports are self-describing: they echo the full config and all derived
seeds, store the confusion matrix and the raw test scores per model (so
every metric can be recomputed from the report alone), and carry per-member
provenance for the ensembles. All wall-clock data lives under a single
top-level "timings" key; two runs with the same config and seed produce
byte-identical JSON once that key is dropped.
"""

from __future__ import annotations

import json
import sys
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def to_jsonable(obj):
    """Recursively convert numpy/dataclass values into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(asdict(obj))
    return obj


def member_provenance(member, index: int) -> dict:
    """JSON-able provenance record of one ensemble member."""
    entry: dict = {
        "index": index,
        "weight": member.weight,
        "subset_size": member.subset_size,
        "seed": member.seed,
    }
    if member.contamination is not None:
        entry["contamination"] = member.contamination
        entry["threshold"] = member.threshold
        entry["bin_sizes"] = member.bin_sizes
        entry["majority_per_bin"] = member.majority_per_bin
        entry["asw"] = member.asw
        entry["d"] = member.d
        entry["n"] = member.n
    if member.breakdown is not None:
        entry["cew"] = {
            "c_value": member.breakdown.c_value,
            "e_value": member.breakdown.e_value,
            "cew": member.breakdown.cew,
            "recall": member.breakdown.recall,
            "confusion": member.breakdown.source_cm.as_dict(),
        }
    return to_jsonable(entry)


def model_entry(metric_set, cm, scores, members=None) -> dict:
    entry = {
        "metrics": metric_set.as_dict(),
        "confusion": cm.as_dict(),
        "scores": scores,
    }
    if members is not None:
        entry["members"] = members
    return to_jsonable(entry)


def metric_means(runs: list, model_names: list) -> dict:
    """Per-model mean of each metric across runs; None-valued AUCs skipped."""
    means: dict = {}
    for name in model_names:
        per_metric: dict = {}
        for key in ("accuracy", "precision", "recall", "f1", "auc"):
            values = [run["models"][name]["metrics"][key] for run in runs]
            defined = [v for v in values if v is not None]
            per_metric[key] = sum(defined) / len(defined) if defined else None
        means[name] = per_metric
    return means


def dumps_report(report: dict) -> str:
    return json.dumps(to_jsonable(report), indent=2, sort_keys=True)


def strip_timings(obj):
    """Deep copy with every "timings" key removed (for determinism checks)."""
    if isinstance(obj, dict):
        return {k: strip_timings(v) for k, v in obj.items() if k != "timings"}
    if isinstance(obj, list):
        return [strip_timings(v) for v in obj]
    return obj


def write_text(text: str, output: str | Path) -> None:
    """Write to a path, or to stdout when output is '-'."""
    if str(output) == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(output).write_text(text, encoding="utf-8")
