"""Score-bin undersampling.

The training set is split into k bins on the normalized anomaly score: bin l
(1-based) covers [(l-1)/k, l/k), with score 1.0 going to bin k. Each bin gets

* a weight from its size (log-size, normalized over bins with >= 2 members;
  size-0/1 bins carry no weight),
* a boundary emphasis d = 1 / |midpoint - (1-c)| (clamped at 1e-6 distance),
* an integer undersample count n = |N| * weight * d / sum(d), rounded
  half-up, floored at 1 for weighted bins that do have majority members, and
  capped at the bin's majority count.

The member subset is the union of the per-bin majority draws with every
minority training sample. A quantile-based equal-count split is provided for
the ablation variant that removes the size weighting.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .core import Dataset

logger = logging.getLogger(__name__)

DISTANCE_CLAMP = 1e-6


@dataclass
class BinPartition:
    """k score bins over the training rows, plus the per-bin statistics.

    `bins` holds row indices of all training samples per bin;
    `majority_bins` the negative-labelled subset of each. `asw`, `d` and `n`
    start unset and are filled by the compute_* operations.
    """

    k: int
    bins: list = field(default_factory=list)
    majority_bins: list = field(default_factory=list)
    asw: np.ndarray | None = None
    d: np.ndarray | None = None
    n: np.ndarray | None = None

    @property
    def bin_sizes(self) -> np.ndarray:
        return np.array([b.size for b in self.bins], dtype=np.int64)

    @property
    def majority_per_bin(self) -> np.ndarray:
        return np.array([b.size for b in self.majority_bins], dtype=np.int64)


def bin_index(scores: np.ndarray, k: int) -> np.ndarray:
    """0-based bin of each score: min(floor(score*k), k-1)."""
    return np.minimum((np.asarray(scores, dtype=np.float64) * k).astype(np.int64), k - 1)


def split_bins(scores: np.ndarray, labels: np.ndarray, k: int) -> BinPartition:
    """Partition row indices into k equal score intervals."""
    if k < 2:
        raise ValueError(f"bin count must be at least 2, got {k}")
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    which = bin_index(scores, k)
    part = BinPartition(k=k)
    for l in range(k):
        members = np.nonzero(which == l)[0]
        part.bins.append(members)
        part.majority_bins.append(members[labels[members] == 0])
    return part


def split_bins_quantile(scores: np.ndarray, labels: np.ndarray, k: int) -> BinPartition:
    """Equal-count partition by score order (sizes differ by at most 1)."""
    if k < 2:
        raise ValueError(f"bin count must be at least 2, got {k}")
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    order = np.argsort(scores, kind="stable")
    part = BinPartition(k=k)
    for chunk in np.array_split(order, k):
        members = np.sort(chunk)
        part.bins.append(members)
        part.majority_bins.append(members[labels[members] == 0])
    return part


def compute_asw(partition: BinPartition) -> np.ndarray:
    """Per-bin weights proportional to ln(bin size) over bins of size >= 2.

    Bins with 0 or 1 members get weight 0 (the log-size form contributes
    nothing there). If no bin has 2 members, falls back to uniform weight
    over the nonempty bins. Sets and returns partition.asw.
    """
    sizes = partition.bin_sizes
    eligible = sizes >= 2
    if eligible.any():
        with np.errstate(divide="ignore"):
            w = np.where(eligible, np.log(np.maximum(sizes, 1)), 0.0)
        w = w / w.sum()
    else:
        nonempty = sizes > 0
        w = nonempty / nonempty.sum()
    partition.asw = w
    return w


def compute_d(k: int, c: float) -> np.ndarray:
    """Reciprocal distance of each bin midpoint to the outlier boundary 1-c.

    d_l = 1 / max(|(l - 0.5)/k - (1 - c)|, 1e-6); the clamp keeps the bin
    sitting exactly on the boundary finite while still dominant.
    """
    if k < 2:
        raise ValueError(f"bin count must be at least 2, got {k}")
    if not 0.0 < c < 1.0:
        raise ValueError(f"contamination must be in (0, 1), got {c}")
    mid = (np.arange(1, k + 1) - 0.5) / k
    dist = np.abs(mid - (1.0 - c))
    return 1.0 / np.maximum(dist, DISTANCE_CLAMP)


def compute_n(partition: BinPartition, negative_total: int) -> np.ndarray:
    """Integer undersample counts n_l from the asw and d weights.

    raw_l = |N| * asw_l * d_l / sum(d); n_l = round-half-up(raw_l), floored
    at 1 when the bin has any majority member and positive weight, capped at
    the bin's majority count. Sets and returns partition.n.
    """
    if partition.asw is None or partition.d is None:
        raise ValueError("compute_asw and compute_d must run before compute_n")
    raw = negative_total * partition.asw * (partition.d / partition.d.sum())
    counts = np.floor(raw + 0.5).astype(np.int64)
    avail = partition.majority_per_bin
    lower = ((avail >= 1) & (partition.asw > 0)).astype(np.int64)
    counts = np.clip(counts, lower, avail)
    partition.n = counts
    return counts


def equal_counts(total: int, k: int) -> np.ndarray:
    """Split `total` into k integers differing by at most 1 (first bins larger)."""
    base, rem = divmod(int(total), k)
    out = np.full(k, base, dtype=np.int64)
    out[:rem] += 1
    return out


def build_subset(partition: BinPartition, train: Dataset, seed: int) -> Dataset:
    """Per-bin majority draws (without replacement) plus all minority rows."""
    if partition.n is None:
        raise ValueError("compute_n must run before build_subset")
    rng = np.random.default_rng(seed)
    drawn = []
    for members, take in zip(partition.majority_bins, partition.n):
        if take > 0:
            drawn.append(rng.choice(members, size=int(take), replace=False))
    minority = np.nonzero(train.y == 1)[0]
    idx = np.sort(np.concatenate(drawn + [minority]))
    subset = train.take(idx)
    if logger.isEnabledFor(logging.DEBUG):
        pos = subset.positive_count
        logger.debug("subset: %d rows, %d majority, %d minority, IR %.2f",
                     subset.n, subset.n - pos, pos, (subset.n - pos) / max(pos, 1))
    return subset
