"""Anomaly detectors and contamination thresholding.

Detectors assign each training sample a raw outlyingness score; scores are
min-max normalized to [0, 1] over the training set, and a contamination
coefficient ``c`` in (0, 1) turns them into outlier flags: the top-``c``
fraction (by the (1-c)-quantile threshold, ties included) is flagged. The
flags against the true labels give the training confusion matrix that the
member weighting is computed from.

Two detectors are provided:

* Isolation forest: random-split trees over subsamples; short average path
  length means anomalous. Score is 2**(-E[h(x)] / c(psi)) with the standard
  harmonic-number average-path-length normalizer.
* k-NN: distance to the k-th nearest training neighbour (self excluded when
  scoring the training set). Exact brute-force search, O(n^2); fine at the
  dataset sizes this package targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ._rng import derive_seed
from .core import ConfusionMatrix, Dataset, confusion

EULER_GAMMA = float(np.euler_gamma)


def expected_path_length(size: float) -> float:
    """Average unsuccessful-search path length c(n) of a binary search tree.

    c(1) = 0 and c(2) = 1 by convention; for n > 2,
    c(n) = 2 * (ln(n - 1) + gamma) - 2 * (n - 1) / n.
    """
    if size <= 1:
        return 0.0
    if size == 2:
        return 1.0
    return 2.0 * (math.log(size - 1.0) + EULER_GAMMA) - 2.0 * (size - 1.0) / size


def _adjust_table(max_size: int) -> np.ndarray:
    """Lookup table adjust[s] = c(s) for leaf sizes 0..max_size."""
    return np.array([expected_path_length(s) for s in range(max_size + 1)])


@dataclass
class IsolationForestModel:
    """Fitted isolation forest; packed flat tree arrays, immutable."""

    features: np.ndarray    # (T, maxn) split feature per slot, -1 = leaf
    thresholds: np.ndarray  # (T, maxn)
    lefts: np.ndarray       # (T, maxn) child slots
    rights: np.ndarray      # (T, maxn)
    sizes: np.ndarray       # (T, maxn) build samples that reached the slot
    node_counts: np.ndarray  # (T,)
    tree_count: int
    subsample_size: int
    height_limit: int
    dim: int
    seed: int
    _adjust: np.ndarray = field(repr=False, default=None)
    _train_raw: np.ndarray = field(repr=False, default=None)

    def raw_scores(self, X: np.ndarray) -> np.ndarray:
        """Raw anomaly score 2**(-E[h(x)] / c(psi)) per row of X."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.dim:
            raise ValueError(f"probe has {X.shape[1]} features, model expects {self.dim}")
        total = kernels.iforest_depth_sum(
            self.features, self.thresholds, self.lefts, self.rights,
            self.sizes, self._adjust, X,
        )
        avg_depth = total / self.tree_count
        return 2.0 ** (-avg_depth / expected_path_length(self.subsample_size))

    def train_scores(self) -> np.ndarray:
        """Raw scores of the training set (cached at fit time)."""
        return self._train_raw


def fit_isolation_forest(train: Dataset, tree_count: int = 100,
                         subsample: int = 256, seed: int = 0) -> IsolationForestModel:
    """Fit an isolation forest on the training features.

    Each tree is grown on min(subsample, n) rows drawn without replacement,
    to height limit ceil(log2(psi)). Deterministic in `seed`.
    """
    if train.n < 2:
        raise ValueError("isolation forest needs at least 2 training samples")
    if tree_count < 1:
        raise ValueError("tree_count must be positive")
    if subsample < 2:
        raise ValueError("subsample size must be at least 2")
    psi = min(subsample, train.n)
    height_limit = int(math.ceil(math.log2(psi)))
    rng = np.random.default_rng(derive_seed(seed, 1))
    sub_idx = np.empty((tree_count, psi), dtype=np.int64)
    for t in range(tree_count):
        sub_idx[t] = rng.choice(train.n, size=psi, replace=False)
    tree_seeds = np.array([derive_seed(seed, 2, t) for t in range(tree_count)],
                          dtype=np.uint64)
    features, thresholds, lefts, rights, sizes, counts = kernels.build_iforest(
        train.X, sub_idx, height_limit, tree_seeds,
    )
    model = IsolationForestModel(
        features=features, thresholds=thresholds, lefts=lefts, rights=rights,
        sizes=sizes, node_counts=counts, tree_count=tree_count,
        subsample_size=psi, height_limit=height_limit, dim=train.dim, seed=seed,
        _adjust=_adjust_table(psi),
    )
    model._train_raw = model.raw_scores(train.X)
    return model


def raw_iforest_score(model: IsolationForestModel, x: np.ndarray) -> float:
    """Raw isolation-forest score of a single sample."""
    return float(model.raw_scores(np.asarray(x, dtype=np.float64)[None, :])[0])


@dataclass
class KnnDetector:
    """k-th nearest neighbour distance detector over a stored training set."""

    X_train: np.ndarray
    k: int

    def raw_scores(self, X: np.ndarray, exclude_self: bool = False) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.X_train.shape[1]:
            raise ValueError(
                f"probe has {X.shape[1]} features, detector expects {self.X_train.shape[1]}")
        return kernels.kth_neighbor_distances(self.X_train, X, self.k, exclude_self)

    def train_scores(self) -> np.ndarray:
        return self.raw_scores(self.X_train, exclude_self=True)


def fit_knn_detector(train: Dataset, k: int) -> KnnDetector:
    """Store the training set for k-th-neighbour scoring; k < n required."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if k >= train.n:
        raise ValueError(f"k={k} must be smaller than the training size {train.n}")
    return KnnDetector(X_train=train.X, k=k)


def normalize_scores(raw: np.ndarray) -> np.ndarray:
    """Min-max normalize to [0, 1]; a constant vector maps to all 0.5."""
    raw = np.asarray(raw, dtype=np.float64)
    if raw.size == 0:
        raise ValueError("cannot normalize an empty score vector")
    lo = raw.min()
    hi = raw.max()
    if hi == lo:
        return np.full(raw.shape, 0.5)
    return (raw - lo) / (hi - lo)


@dataclass(frozen=True)
class AnomalyScoring:
    """Normalized scores plus the contamination threshold and its flags.

    outlier_flags[j] is True exactly when scores[j] >= threshold, where the
    threshold is the (1-c)-quantile of the scores. The confusion matrix
    treats a flagged sample as a positive prediction against the true labels.
    """

    scores: np.ndarray
    contamination: float
    threshold: float
    outlier_flags: np.ndarray
    train_cm: ConfusionMatrix


def apply_contamination(scores: np.ndarray, labels: np.ndarray, c: float) -> AnomalyScoring:
    """Flag the top-c fraction of normalized scores as outliers.

    The threshold is the element at index floor((1-c)*n) of the ascending
    sort; every score >= threshold is flagged (ties err toward flagging).
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if not 0.0 < c < 1.0:
        raise ValueError(f"contamination must be in (0, 1), got {c}")
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be aligned 1-D sequences")
    if scores.min() < 0.0 or scores.max() > 1.0:
        raise ValueError("scores must be normalized to [0, 1]")
    order = np.sort(scores)
    idx = int(np.floor((1.0 - c) * scores.size))
    threshold = float(order[min(idx, scores.size - 1)])
    flags = scores >= threshold
    cm = confusion(labels, flags.astype(np.int64))
    return AnomalyScoring(
        scores=scores, contamination=c, threshold=threshold,
        outlier_flags=flags, train_cm=cm,
    )
