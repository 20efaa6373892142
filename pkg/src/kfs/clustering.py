"""Deterministic k-means on frame features.

Rows are L2-normalized before clustering so Euclidean distances track the
cosine geometry of the similarity features.  Initialization is seeded
k-means++ with a single restart; empty clusters are repaired by stealing
the point farthest from its assigned center.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import InfeasibleError, NormalizationError
from .types import FeatureMatrix

MAX_ITER = 100
REL_TOL = 1e-6


@dataclass(frozen=True)
class ClusteringResult:
    assignments: np.ndarray
    centers: np.ndarray
    inertia: float
    iterations: int
    inertia_history: tuple[float, ...]


def _normalize_rows(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms == 0):
        bad = int(np.nonzero(norms == 0)[0][0])
        raise NormalizationError(f"feature row {bad} has zero norm")
    return x / norms[:, None]


def _squared_distances(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # (n, k) matrix of squared Euclidean distances, clipped at zero to
    # guard against negative rounding dust.
    d2 = (
        np.sum(x * x, axis=1)[:, None]
        - 2.0 * x @ centers.T
        + np.sum(centers * centers, axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def _kmeanspp_centers(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = np.sum((x - x[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        chosen.append(idx)
        d2 = np.minimum(d2, np.sum((x - x[idx]) ** 2, axis=1))
    return x[chosen].copy()


def nearest_center(point: np.ndarray, centers: np.ndarray) -> int:
    """Index of the closest center; ties go to the smallest index."""
    point = np.asarray(point, dtype=float)
    d2 = np.sum((centers - point[None, :]) ** 2, axis=1)
    return int(np.argmin(d2))


def kmeans_fit(features: FeatureMatrix, k_clusters: int, seed: int) -> ClusteringResult:
    """Lloyd's algorithm with seeded k-means++ initialization.

    Deterministic given (features, k_clusters, seed).  Stops when the
    relative inertia improvement falls below 1e-6 or after 100 iterations.
    """
    n = features.n_frames
    if not 1 <= k_clusters <= n:
        raise InfeasibleError(
            f"k_clusters must lie in [1, {n}], got {k_clusters}"
        )
    x = _normalize_rows(np.asarray(features.data, dtype=float))
    rng = np.random.default_rng(seed)
    centers = _kmeanspp_centers(x, k_clusters, rng)

    assignments = np.zeros(n, dtype=int)
    history: list[float] = []
    prev_inertia = np.inf
    iterations = 0
    for iterations in range(1, MAX_ITER + 1):
        d2 = _squared_distances(x, centers)
        assignments = np.argmin(d2, axis=1)

        # Repair empty clusters by stealing the globally farthest point.
        counts = np.bincount(assignments, minlength=k_clusters)
        for empty in np.nonzero(counts == 0)[0]:
            own = d2[np.arange(n), assignments].copy()
            own[counts[assignments] <= 1] = -1.0
            thief = int(np.argmax(own))
            counts[assignments[thief]] -= 1
            assignments[thief] = empty
            counts[empty] += 1

        for c in range(k_clusters):
            centers[c] = x[assignments == c].mean(axis=0)

        d2 = _squared_distances(x, centers)
        inertia = float(d2[np.arange(n), assignments].sum())
        history.append(inertia)
        if prev_inertia - inertia < REL_TOL * max(prev_inertia, 1e-300):
            break
        prev_inertia = inertia

    return ClusteringResult(
        assignments=assignments,
        centers=centers,
        inertia=history[-1],
        iterations=iterations,
        inertia_history=tuple(history),
    )


class FrameKMeans(BaseEstimator):
    """Estimator-style wrapper around :func:`kmeans_fit`.

    After ``fit`` exposes ``labels_``, ``cluster_centers_``, ``inertia_``
    and ``n_iter_`` in the usual places.
    """

    def __init__(self, n_clusters: int = 8, random_state: int = 0):
        self.n_clusters = n_clusters
        self.random_state = random_state

    def fit(self, X, y=None):
        features = X if isinstance(X, FeatureMatrix) else FeatureMatrix(np.asarray(X))
        result = kmeans_fit(features, self.n_clusters, self.random_state)
        self.labels_ = result.assignments
        self.cluster_centers_ = result.centers
        self.inertia_ = result.inertia
        self.n_iter_ = result.iterations
        return self

    def predict(self, X):
        x = X.data if isinstance(X, FeatureMatrix) else np.asarray(X, dtype=float)
        x = _normalize_rows(x)
        return np.argmin(_squared_distances(x, self.cluster_centers_), axis=1)

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_
