"""Base classifiers behind a common train/score surface.

All three classifiers score into [0, 1] (predicted positive-class
probability-like value) and predict 1 exactly when the score is >= 0.5.
Fitted state is immutable; scoring is pure.

* Decision tree: greedy CART on numeric features, weighted-gini splits,
  deterministic tie-breaking (lowest feature index, then lowest threshold).
  Leaves score their positive fraction.
* Logistic regression: full-batch gradient descent on log-loss over
  standardized features, zero-initialized, so training is deterministic.
* k-NN: positive fraction among the k nearest stored rows (Euclidean,
  distance ties broken by lower row index).

Single-class training subsets are allowed everywhere and produce a constant
classifier; extreme contamination settings can generate them and the
ensemble has to survive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import Dataset


def _as_matrix(X: np.ndarray, dim: int, what: str) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != dim:
        raise ValueError(f"{what}: probe has {X.shape[1]} features, expected {dim}")
    return X


@dataclass
class DecisionTree:
    """CART classifier; flat node arrays filled by fit()."""

    max_depth: int = 10
    kind: str = "decision_tree"

    def fit(self, X: np.ndarray, y: np.ndarray) -> "DecisionTree":
        X = np.asarray(X, dtype=np.float64)
        if X.shape[0] < 1:
            raise ValueError("cannot fit a tree on an empty subset")
        if self.max_depth < 0:
            raise ValueError("max_depth must be nonnegative")
        self._dim = X.shape[1]
        (self._features, self._thresholds, self._lefts,
         self._rights, self._values) = kernels.cart_build(X, y, self.max_depth)
        return self

    def scores(self, X: np.ndarray) -> np.ndarray:
        X = _as_matrix(X, self._dim, "decision tree")
        return kernels.cart_apply(self._features, self._thresholds,
                                  self._lefts, self._rights, self._values, X)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.scores(X) >= 0.5).astype(np.int64)

    @property
    def node_count(self) -> int:
        return self._features.size


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_loss_and_grad(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray):
    """Mean log-loss and its analytic gradient at (w, b).

    X is assumed already standardized. Returns (loss, grad_w, grad_b).
    """
    z = X @ w + b
    p = _sigmoid(z)
    eps = 1e-12
    loss = -float(np.mean(y * np.log(p + eps) + (1.0 - y) * np.log(1.0 - p + eps)))
    resid = p - y
    grad_w = X.T @ resid / X.shape[0]
    grad_b = float(resid.mean())
    return loss, grad_w, grad_b


@dataclass
class LogisticRegression:
    """Full-batch gradient-descent logistic regression.

    Features are standardized at fit time (statistics stored); weights start
    at zero, so the result is deterministic and the `seed` argument of the
    fit helpers exists only for interface uniformity.
    """

    rate: float = 0.1
    epochs: int = 500
    kind: str = "logistic_regression"

    def fit(self, X: np.ndarray, y: np.ndarray) -> "LogisticRegression":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        self._dim = X.shape[1]
        self._mu = X.mean(axis=0)
        sigma = X.std(axis=0)
        sigma[sigma == 0.0] = 1.0
        self._sigma = sigma
        Xs = (X - self._mu) / self._sigma
        w = np.zeros(self._dim)
        b = 0.0
        for _ in range(self.epochs):
            _, grad_w, grad_b = logistic_loss_and_grad(w, b, Xs, y)
            w -= self.rate * grad_w
            b -= self.rate * grad_b
        self._w = w
        self._b = b
        return self

    def scores(self, X: np.ndarray) -> np.ndarray:
        X = _as_matrix(X, self._dim, "logistic regression")
        Xs = (X - self._mu) / self._sigma
        return _sigmoid(Xs @ self._w + self._b)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.scores(X) >= 0.5).astype(np.int64)


@dataclass
class KnnClassifier:
    """Majority-vote-fraction k-NN; ties in distance go to the lower index."""

    neighbors: int = 5
    kind: str = "knn"

    def fit(self, X: np.ndarray, y: np.ndarray) -> "KnnClassifier":
        X = np.asarray(X, dtype=np.float64)
        if self.neighbors < 1:
            raise ValueError("neighbors must be at least 1")
        if self.neighbors > X.shape[0]:
            raise ValueError(
                f"neighbors={self.neighbors} exceeds the subset size {X.shape[0]}")
        self._dim = X.shape[1]
        self._X = X
        self._y = np.asarray(y, dtype=np.float64)
        return self

    def scores(self, X: np.ndarray) -> np.ndarray:
        X = _as_matrix(X, self._dim, "knn classifier")
        out = np.empty(X.shape[0])
        chunk = max(1, min(X.shape[0], 4_000_000 // max(self._X.shape[0], 1)))
        for start in range(0, X.shape[0], chunk):
            stop = min(start + chunk, X.shape[0])
            diff = X[start:stop, None, :] - self._X[None, :, :]
            d2 = np.einsum("ijk,ijk->ij", diff, diff)
            nearest = np.argsort(d2, axis=1, kind="stable")[:, : self.neighbors]
            out[start:stop] = self._y[nearest].mean(axis=1)
        return out

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.scores(X) >= 0.5).astype(np.int64)


def fit_tree(subset: Dataset, max_depth: int = 10, seed: int = 0) -> DecisionTree:
    """Fit a CART tree on a subset; `seed` is unused (fully deterministic)."""
    del seed
    return DecisionTree(max_depth=max_depth).fit(subset.X, subset.y)


def fit_logistic(subset: Dataset, rate: float = 0.1, epochs: int = 500,
                 seed: int = 0) -> LogisticRegression:
    """Fit logistic regression; `seed` is unused (zero initialization)."""
    del seed
    return LogisticRegression(rate=rate, epochs=epochs).fit(subset.X, subset.y)


def fit_knn_classifier(subset: Dataset, neighbors: int = 5) -> KnnClassifier:
    return KnnClassifier(neighbors=neighbors).fit(subset.X, subset.y)


def score(classifier, x: np.ndarray) -> float:
    """Score a single sample through any fitted classifier."""
    return float(classifier.scores(np.asarray(x, dtype=np.float64)[None, :])[0])
