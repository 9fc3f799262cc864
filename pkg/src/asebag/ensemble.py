"""The bagging ensemble: schedule, per-member pipeline, weighted combination.

Each of the b members runs the same pipeline with its own derived seed and
its own contamination coefficient from a linear ramp:

    fit detector -> normalize scores -> flag top-c fraction -> split bins ->
    weight bins -> undersample majority per bin -> add all minority ->
    fit base classifier -> weight the member from the detector's confusion.

Members are independent given the schedule, so they may be trained by a
small thread pool (ASE_THREADS env var: unset = sequential, 0 = one worker
per CPU, N = N workers); results are reduced in member order, so the fitted
model is identical under any worker count.

Prediction is CEW-weighted soft voting: score = sum(w_i * s_i) / sum(w_i),
predicted class 1 iff score >= 0.5. If every weight is 0 (possible under
degenerate detectors) the members are averaged uniformly.

Ablation variants: `no_cew` keeps the pipeline but weights members
uniformly; `no_asw` replaces the interval bins with equal-count quantile
bins and draws equally from each (total draw matched to what the full
pipeline would have drawn, for comparability); `no_both` applies both.
"""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ._rng import STREAM_DETECTOR, STREAM_MEMBER, STREAM_SUBSET, derive_seed
from .anomaly import apply_contamination, fit_isolation_forest, fit_knn_detector, normalize_scores
from .core import AsebagError, Dataset
from .learners import DecisionTree, KnnClassifier, LogisticRegression
from .sampler import (
    build_subset,
    compute_asw,
    compute_d,
    compute_n,
    equal_counts,
    split_bins,
    split_bins_quantile,
)
from .weighting import CewBreakdown, cew

logger = logging.getLogger(__name__)

DETECTORS = ("iforest", "knn")
CLASSIFIERS = ("decision_tree", "logistic_regression", "knn")
VARIANTS = ("full", "no_asw", "no_cew", "no_both")


@dataclass(frozen=True)
class AseConfig:
    """Hyperparameters of one ensemble run."""

    bins: int = 5
    members: int = 50
    c_min: float = 0.05
    c_max: float = 0.40
    detector: str = "iforest"
    trees: int = 100
    subsample: int = 256
    detector_k: int = 10
    classifier: str = "decision_tree"
    max_depth: int = 10
    learning_rate: float = 0.1
    epochs: int = 500
    neighbors: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.bins < 2:
            raise ValueError("bins must be at least 2")
        if self.members < 1:
            raise ValueError("members must be at least 1")
        if not 0.0 < self.c_min <= self.c_max < 1.0:
            raise ValueError(
                f"contamination range must satisfy 0 < c_min <= c_max < 1, "
                f"got [{self.c_min}, {self.c_max}]")
        if self.detector not in DETECTORS:
            raise ValueError(f"unknown detector {self.detector!r}; choose from {DETECTORS}")
        if self.classifier not in CLASSIFIERS:
            raise ValueError(f"unknown classifier {self.classifier!r}; choose from {CLASSIFIERS}")

    def as_dict(self) -> dict:
        return {
            "bins": self.bins, "members": self.members,
            "c_min": self.c_min, "c_max": self.c_max,
            "detector": self.detector, "trees": self.trees,
            "subsample": self.subsample, "detector_k": self.detector_k,
            "classifier": self.classifier, "max_depth": self.max_depth,
            "learning_rate": self.learning_rate, "epochs": self.epochs,
            "neighbors": self.neighbors, "seed": self.seed,
        }


@dataclass
class WeightedMember:
    """One trained base classifier with its weight and provenance."""

    classifier: object
    weight: float
    contamination: float | None = None
    seed: int | None = None
    breakdown: CewBreakdown | None = None
    bin_sizes: np.ndarray | None = None
    majority_per_bin: np.ndarray | None = None
    asw: np.ndarray | None = None
    d: np.ndarray | None = None
    n: np.ndarray | None = None
    subset_size: int = 0
    threshold: float | None = None


@dataclass
class AseModel:
    """Trained ensemble; members ordered by schedule index."""

    members: list
    config: AseConfig
    variant: str = "full"
    stage_seconds: dict = field(default_factory=dict)

    @property
    def weights(self) -> np.ndarray:
        return np.array([m.weight for m in self.members])

    def member_scores(self, X: np.ndarray) -> np.ndarray:
        """(b, n) matrix of per-member scores."""
        return np.vstack([m.classifier.scores(X) for m in self.members])

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        return combine_scores(self.member_scores(X), self.weights)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_scores(X) >= 0.5).astype(np.int64)


def combine_scores(score_matrix: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Normalized weighted soft vote; uniform mean when all weights are 0."""
    total = weights.sum()
    if total > 0.0:
        return weights @ score_matrix / total
    return score_matrix.mean(axis=0)


def contamination_schedule(b: int, c_min: float, c_max: float) -> np.ndarray:
    """Linear ramp over members; a single member gets the midpoint."""
    if b < 1:
        raise ValueError("need at least one member")
    if b == 1:
        return np.array([(c_min + c_max) / 2.0])
    return np.linspace(c_min, c_max, b)


def make_classifier(config: AseConfig):
    if config.classifier == "decision_tree":
        return DecisionTree(max_depth=config.max_depth)
    if config.classifier == "logistic_regression":
        return LogisticRegression(rate=config.learning_rate, epochs=config.epochs)
    return KnnClassifier(neighbors=config.neighbors)


def _fit_detector(train: Dataset, config: AseConfig, seed: int):
    if config.detector == "iforest":
        return fit_isolation_forest(train, tree_count=config.trees,
                                    subsample=config.subsample, seed=seed)
    return fit_knn_detector(train, k=config.detector_k)


def _train_member(train: Dataset, config: AseConfig, c_i: float, member_seed: int,
                  quantile_bins: bool, timings: dict) -> WeightedMember:
    t0 = time.perf_counter()
    detector = _fit_detector(train, config, derive_seed(member_seed, STREAM_DETECTOR))
    raw = detector.train_scores()
    t1 = time.perf_counter()

    norm = normalize_scores(raw)
    scoring = apply_contamination(norm, train.y, c_i)

    # Always evaluate the interval-bin pipeline: the quantile variant matches
    # its total draw to what the full pipeline would take.
    interval = split_bins(norm, train.y, config.bins)
    compute_asw(interval)
    interval.d = compute_d(config.bins, c_i)
    n_interval = compute_n(interval, train.negative_count)

    if quantile_bins:
        part = split_bins_quantile(norm, train.y, config.bins)
        counts = equal_counts(int(n_interval.sum()), config.bins)
        part.asw = np.full(config.bins, 1.0 / config.bins)
        part.d = compute_d(config.bins, c_i)
        part.n = np.minimum(counts, part.majority_per_bin)
    else:
        part = interval

    subset = build_subset(part, train, derive_seed(member_seed, STREAM_SUBSET))
    t2 = time.perf_counter()

    clf = make_classifier(config).fit(subset.X, subset.y)
    t3 = time.perf_counter()

    breakdown = cew(scoring.train_cm, train.positive_count)
    timings["detector_fit"] = t1 - t0
    timings["sampling"] = t2 - t1
    timings["classifier_fit"] = t3 - t2
    return WeightedMember(
        classifier=clf,
        weight=breakdown.cew,
        contamination=c_i,
        seed=member_seed,
        breakdown=breakdown,
        bin_sizes=part.bin_sizes,
        majority_per_bin=part.majority_per_bin,
        asw=part.asw,
        d=part.d,
        n=part.n,
        subset_size=subset.n,
        threshold=scoring.threshold,
    )


def _worker_count() -> int:
    raw = os.environ.get("ASE_THREADS", "").strip()
    if not raw:
        return 1
    count = int(raw)
    if count == 0:
        return os.cpu_count() or 1
    return max(1, count)


def _train_members(train: Dataset, config: AseConfig, variant: str) -> AseModel:
    if train.positive_count < 2 or train.negative_count < 2:
        raise ValueError("training set needs at least 2 samples of each class")
    schedule = contamination_schedule(config.members, config.c_min, config.c_max)
    quantile = variant in ("no_asw", "no_both")
    uniform = variant in ("no_cew", "no_both")

    def one(i: int):
        member_seed = derive_seed(config.seed, STREAM_MEMBER, i)
        timings: dict = {}
        try:
            member = _train_member(train, config, float(schedule[i]), member_seed,
                                   quantile, timings)
        except Exception as exc:
            raise AsebagError(f"training member {i} failed: {exc}") from exc
        return member, timings

    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(config.members)))
    else:
        results = [one(i) for i in range(config.members)]

    members = []
    stage_seconds = {"detector_fit": 0.0, "sampling": 0.0, "classifier_fit": 0.0}
    for member, timings in results:
        if uniform:
            member.weight = 1.0
        members.append(member)
        for key, value in timings.items():
            stage_seconds[key] += value
    logger.debug("trained %d members (%s), %d with positive weight",
                 len(members), variant, int((np.array([m.weight for m in members]) > 0).sum()))
    return AseModel(members=members, config=config, variant=variant,
                    stage_seconds=stage_seconds)


def train_ase(train: Dataset, config: AseConfig) -> AseModel:
    """Train the full ensemble per the member pipeline above."""
    return _train_members(train, config, "full")


def train_ablated(train: Dataset, config: AseConfig, variant: str) -> AseModel:
    """Train an ablation variant: no_asw, no_cew or no_both."""
    if variant not in ("no_asw", "no_cew", "no_both"):
        raise ValueError(f"unknown ablation variant {variant!r}")
    return _train_members(train, config, variant)


def train_underbagging(train: Dataset, members: int, seed: int,
                       config: AseConfig | None = None) -> AseModel:
    """Baseline: each member trains on a random balanced undersample.

    Every member draws |P| majority rows without replacement (fewer if the
    majority is smaller), joins all minority rows, and gets uniform weight.
    """
    if train.positive_count < 2 or train.negative_count < 2:
        raise ValueError("training set needs at least 2 samples of each class")
    config = config if config is not None else AseConfig(seed=seed)
    config = replace(config, members=members, seed=seed)
    neg_idx = np.nonzero(train.y == 0)[0]
    pos_idx = np.nonzero(train.y == 1)[0]
    draw_size = min(pos_idx.size, neg_idx.size)
    out = []
    for i in range(members):
        rng = np.random.default_rng(derive_seed(seed, STREAM_MEMBER, i))
        drawn = rng.choice(neg_idx, size=draw_size, replace=False)
        idx = np.sort(np.concatenate([drawn, pos_idx]))
        subset = train.take(idx)
        clf = make_classifier(config).fit(subset.X, subset.y)
        out.append(WeightedMember(classifier=clf, weight=1.0,
                                  seed=derive_seed(seed, STREAM_MEMBER, i),
                                  subset_size=subset.n))
    return AseModel(members=out, config=config, variant="underbagging")
