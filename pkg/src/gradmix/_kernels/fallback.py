"""Pure-NumPy kernels, used when the compiled extension is unavailable.

Semantics must match ``_core``: nearest-centroid ties break toward the
lowest centroid index, distances are plain Euclidean, and mean-distance
conventions (self excluded from the own cluster, empty foreign clusters
reported as +inf) are identical.
"""

from __future__ import annotations

import numpy as np

# Points are processed in blocks to keep the (block, k) distance matrix small.
_BLOCK = 8192


def assign_points(points: np.ndarray, centroids: np.ndarray):
    """Nearest centroid per point.

    Returns (labels, sqdists): int64 centroid indices and the squared
    Euclidean distance from each point to its assigned centroid.
    """
    n = points.shape[0]
    labels = np.empty(n, dtype=np.int64)
    sqdists = np.empty(n, dtype=np.float64)
    for start in range(0, n, _BLOCK):
        block = points[start : start + _BLOCK]
        diff = block[:, None, :] - centroids[None, :, :]
        d2 = np.einsum("ikj,ikj->ik", diff, diff)
        idx = np.argmin(d2, axis=1)  # first minimum = lowest index
        labels[start : start + _BLOCK] = idx
        sqdists[start : start + _BLOCK] = d2[np.arange(len(block)), idx]
    return labels, sqdists


def cluster_mean_distances(points: np.ndarray, labels: np.ndarray, k: int,
                           sample_idx: np.ndarray) -> np.ndarray:
    """Mean Euclidean distance from each sampled point to every cluster.

    The sampled point itself is excluded from its own cluster's mean; a
    singleton own cluster yields 0.0 there. Empty foreign clusters yield
    +inf so they never win a minimum.
    """
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    out = np.empty((len(sample_idx), k), dtype=np.float64)
    for a, idx in enumerate(sample_idx):
        diff = points - points[idx]
        dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        sums = np.bincount(labels, weights=dist, minlength=k)
        denom = counts.copy()
        own = labels[idx]
        denom[own] -= 1.0
        means = np.divide(sums, denom, out=np.full(k, np.inf), where=denom > 0)
        if denom[own] == 0.0:
            means[own] = 0.0
        out[a] = means
    return out
