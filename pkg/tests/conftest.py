import numpy as np
import pytest

from asebag.core import Dataset


def auc_pairwise(scores, labels):
    """O(n^2) pairwise AUC oracle: correctly ordered (pos, neg) pairs, ties half."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    if pos.size == 0 or neg.size == 0:
        return None
    wins = (pos[:, None] > neg[None, :]).sum()
    ties = (pos[:, None] == neg[None, :]).sum()
    return (wins + 0.5 * ties) / (pos.size * neg.size)


def imbalanced_dataset(negatives, positives, dim, separation, seed):
    rng = np.random.default_rng(seed)
    X_neg = rng.standard_normal((negatives, dim))
    X_pos = rng.standard_normal((positives, dim))
    X_pos[:, 0] += separation
    X = np.vstack([X_neg, X_pos])
    y = np.concatenate([np.zeros(negatives, dtype=np.int64),
                        np.ones(positives, dtype=np.int64)])
    return Dataset(X, y)


def clustered_minority(negatives, positives, dim, radius, cluster_std,
                       n_clusters, seed):
    """Majority blob with minority pockets on its rim; heavy class overlap."""
    rng = np.random.default_rng(seed)
    X_neg = rng.standard_normal((negatives, dim))
    centers = rng.standard_normal((n_clusters, dim))
    centers *= radius / np.linalg.norm(centers, axis=1, keepdims=True)
    assign = rng.integers(0, n_clusters, positives)
    X_pos = centers[assign] + cluster_std * rng.standard_normal((positives, dim))
    X = np.vstack([X_neg, X_pos])
    y = np.concatenate([np.zeros(negatives, dtype=np.int64),
                        np.ones(positives, dtype=np.int64)])
    return Dataset(X, y)


@pytest.fixture
def small_imbalanced():
    return imbalanced_dataset(300, 30, 4, 2.0, seed=11)
