"""K-means partitioning feeding the display-selection objective.

The partition exposes the two matrices the selector consumes: the binary
cluster indicator ``C`` and the squared centroid distances ``D``, both
with rows in ascending-id order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import sqdist_matrix


class ClusteringError(ValueError):
    pass


@dataclass
class Partition:
    """K-means output over a fixed id set (rows sorted by ascending id)."""

    ids: np.ndarray
    n_clusters: int
    centroids: np.ndarray
    labels: np.ndarray
    indicator: np.ndarray  # C, (n, K) one-hot rows
    sqdists: np.ndarray  # D, (n, K) squared euclidean distances
    wss_trace: np.ndarray  # within-cluster sum of squares per Lloyd pass

    def __post_init__(self):
        self._rows = {int(i): r for r, i in enumerate(self.ids)}

    @property
    def assignment(self) -> dict:
        return {int(i): int(k) for i, k in zip(self.ids, self.labels)}

    @property
    def wss(self) -> float:
        return float(self.wss_trace[-1])

    def restrict(self, ids) -> tuple[np.ndarray, np.ndarray]:
        """Row-restrict (C, D) to ``ids``, rows in ascending-id order."""
        ordered = sorted(int(i) for i in ids)
        try:
            rows = np.array([self._rows[i] for i in ordered], dtype=np.int64)
        except KeyError as exc:
            raise KeyError(f"unknown id {exc.args[0]} in restriction") from None
        if len(rows) == 0:
            k = self.n_clusters
            return np.empty((0, k)), np.empty((0, k))
        return self.indicator[rows], self.sqdists[rows]


def _plusplus_seed(feats, k, rng):
    n = feats.shape[0]
    centroids = np.empty((k, feats.shape[1]))
    first = int(rng.integers(n))
    centroids[0] = feats[first]
    closest = sqdist_matrix(feats, centroids[0:1])[:, 0]
    for j in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            # all remaining points coincide with chosen centroids
            probs = np.full(n, 1.0 / n)
        else:
            probs = closest / total
        idx = int(rng.choice(n, p=probs))
        centroids[j] = feats[idx]
        d = sqdist_matrix(feats, centroids[j : j + 1])[:, 0]
        np.minimum(closest, d, out=closest)
    return centroids


def kmeans(
    features,
    n_clusters: int,
    seed: int,
    max_iters: int = 100,
    tol: float = 1e-6,
    ids=None,
) -> Partition:
    """Lloyd's algorithm with k-means++ seeding, deterministic per seed.

    Assignment ties break toward the lowest cluster index; clusters that
    empty out during an update are repaired by re-seeding them on the
    point currently farthest from its own centroid. Terminates when the
    largest centroid shift drops below ``tol`` or after ``max_iters``
    passes.
    """
    feats = np.asarray(features, dtype=np.float64)
    if feats.ndim != 2:
        raise ClusteringError("features must be a 2-D array")
    n = feats.shape[0]
    if not np.all(np.isfinite(feats)):
        raise ClusteringError("non-finite feature value")
    if not 1 <= n_clusters <= n:
        raise ClusteringError(f"need 1 <= K <= {n}, got K={n_clusters}")
    if max_iters < 1:
        raise ClusteringError("max_iters must be >= 1")
    if tol <= 0:
        raise ClusteringError("tol must be > 0")
    if ids is None:
        ids = np.arange(n, dtype=np.int64)
    else:
        ids = np.asarray(ids, dtype=np.int64)

    rng = np.random.default_rng(seed)
    centroids = _plusplus_seed(feats, n_clusters, rng)
    wss_trace = []
    for _ in range(max_iters):
        dmat = sqdist_matrix(feats, centroids)
        labels = np.argmin(dmat, axis=1)
        assigned = dmat[np.arange(n), labels]
        wss_trace.append(float(assigned.sum()))
        new_centroids = centroids.copy()
        for k in range(n_clusters):
            members = labels == k
            if np.any(members):
                new_centroids[k] = feats[members].mean(axis=0)
        counts = np.bincount(labels, minlength=n_clusters)
        for k in np.where(counts == 0)[0]:
            far = int(np.argmax(assigned))
            new_centroids[k] = feats[far]
            assigned[far] = 0.0
        shift = np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max()
        centroids = new_centroids
        if shift < tol:
            break

    dmat = np.maximum(sqdist_matrix(feats, centroids), 0.0)
    labels = np.argmin(dmat, axis=1).astype(np.int64)
    wss_trace.append(float(dmat[np.arange(n), labels].sum()))
    indicator = np.zeros((n, n_clusters))
    indicator[np.arange(n), labels] = 1.0
    return Partition(
        ids=ids,
        n_clusters=int(n_clusters),
        centroids=centroids,
        labels=labels,
        indicator=indicator,
        sqdists=dmat,
        wss_trace=np.array(wss_trace),
    )


def restrict(partition: Partition, ids) -> tuple[np.ndarray, np.ndarray]:
    """Functional alias of ``Partition.restrict``."""
    return partition.restrict(ids)
