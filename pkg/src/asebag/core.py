"""Core domain types and evaluation metrics.

Conventions used throughout the package:

* Labels are ``{0, 1}`` with 1 = the minority (positive) class.
* A ``Dataset`` is immutable after construction; its arrays are marked
  read-only so fitted models and concurrent workers can share it safely.
* Feature values are validated at ingestion: rows containing NaN/Inf are
  rejected with a row-indexed error rather than imputed.
* Precision, recall and F1 with a zero denominator are defined as 0.
* AUC is the Mann-Whitney rank statistic (ties at half weight), which equals
  the trapezoidal ROC area and needs no threshold sweep.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.stats import rankdata


class AsebagError(Exception):
    """Base class for package errors."""


class DataError(AsebagError):
    """Malformed input data (bad CSV cell, non-finite feature, bad labels)."""


class Sample(NamedTuple):
    """One labelled observation; `features` is a 1-D float vector."""

    features: np.ndarray
    label: int


@dataclass(frozen=True)
class Dataset:
    """Immutable table of numeric feature vectors with binary labels.

    Attributes:
        X: (n, dim) float64 feature matrix, read-only.
        y: (n,) int64 label vector in {0, 1}, read-only; 1 = minority.
    """

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        X = np.ascontiguousarray(self.X, dtype=np.float64)
        y = np.ascontiguousarray(self.y, dtype=np.int64)
        if X.ndim != 2 or X.shape[0] < 1:
            raise DataError(f"feature matrix must be 2-D and non-empty, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise DataError(f"label vector shape {y.shape} does not match {X.shape[0]} rows")
        finite = np.isfinite(X).all(axis=1)
        if not finite.all():
            bad = int(np.nonzero(~finite)[0][0])
            raise DataError(f"non-finite feature value in row {bad}")
        if not np.isin(y, (0, 1)).all():
            bad = int(np.nonzero(~np.isin(y, (0, 1)))[0][0])
            raise DataError(f"label in row {bad} is not 0 or 1")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def positive_count(self) -> int:
        return int(self.y.sum())

    @property
    def negative_count(self) -> int:
        return self.n - self.positive_count

    def row(self, i: int) -> Sample:
        return Sample(self.X[i], int(self.y[i]))

    def take(self, indices: np.ndarray) -> "Dataset":
        """New Dataset from a row-index selection (copies)."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.X[idx], self.y[idx])


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary confusion counts; positive = minority class."""

    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "fn", "tn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def recall(self) -> float:
        denom = self.tp + self.fn
        return self.tp / denom if denom else 0.0

    @property
    def precision(self) -> float:
        denom = self.tp + self.fp
        return self.tp / denom if denom else 0.0

    def as_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}


@dataclass(frozen=True)
class MetricSet:
    """Accuracy, precision, recall, F1 and AUC, all in [0, 1].

    `auc` is None when the evaluated labels contain a single class (the rank
    statistic is undefined there); the other metrics are still computed.
    """

    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float | None

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "auc": self.auc,
        }


def imbalance_ratio(ds: Dataset) -> float:
    """Majority count over minority count, |N| / |P|.

    Raises ValueError when the dataset has no positive samples.
    """
    pos = ds.positive_count
    if pos == 0:
        raise ValueError("imbalance ratio undefined: dataset has no positive samples")
    return ds.negative_count / pos


def stratified_split(ds: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Split per class: round(train_fraction * class size) rows go to train.

    The two sides partition the dataset (disjoint, complete) and the result
    is deterministic in `seed`. Rounding is half-up. Each class must have at
    least 2 samples.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    rng = np.random.default_rng(seed)
    train_parts = []
    test_parts = []
    for cls in (0, 1):
        idx = np.nonzero(ds.y == cls)[0]
        if idx.size < 2:
            raise ValueError(f"class {cls} has {idx.size} samples; need at least 2 to split")
        perm = rng.permutation(idx)
        k = int(np.floor(train_fraction * idx.size + 0.5))
        train_parts.append(perm[:k])
        test_parts.append(perm[k:])
    train_idx = np.sort(np.concatenate(train_parts))
    test_idx = np.sort(np.concatenate(test_parts))
    if train_idx.size == 0 or test_idx.size == 0:
        raise ValueError("train_fraction leaves one side of the split empty")
    return ds.take(train_idx), ds.take(test_idx)


def confusion(labels, predictions) -> ConfusionMatrix:
    """Confusion counts from aligned {0,1} label and prediction sequences."""
    y = np.asarray(labels, dtype=np.int64)
    p = np.asarray(predictions, dtype=np.int64)
    if y.shape != p.shape or y.ndim != 1:
        raise ValueError(f"labels {y.shape} and predictions {p.shape} must be equal-length 1-D")
    if y.size == 0:
        raise ValueError("cannot build a confusion matrix from empty sequences")
    return ConfusionMatrix(
        tp=int(((y == 1) & (p == 1)).sum()),
        fp=int(((y == 0) & (p == 1)).sum()),
        fn=int(((y == 1) & (p == 0)).sum()),
        tn=int(((y == 0) & (p == 0)).sum()),
    )


def auc_score(scores, labels) -> float | None:
    """Mann-Whitney AUC of `scores` against binary `labels`; ties count 1/2.

    Returns None when only one class is present.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be aligned 1-D sequences")
    n_pos = int((y == 1).sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(s)
    rank_sum = float(ranks[y == 1].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def metrics(cm: ConfusionMatrix, scores, labels) -> MetricSet:
    """Full metric set from a confusion matrix plus the scores behind it."""
    total = cm.total
    accuracy = (cm.tp + cm.tn) / total if total else 0.0
    precision = cm.precision
    recall = cm.recall
    f1 = 2.0 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return MetricSet(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        auc=auc_score(scores, labels),
    )
