"""Regrouping: cluster embeddings with k-means and pick k by silhouette.

The partition file format is line-oriented text: a JSON header
``{"k", "d_emb", "seed", "inertia"}``, then ``k`` centroid lines of
space-separated float repr values, then one ``id<TAB>cluster`` line per
assigned example. float repr round-trips exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from gradmix import _kernels
from gradmix.seeding import substream

PARTITION_VERSION = 1


@dataclass(frozen=True, eq=False)
class Partition:
    """Result of clustering: k centroids plus an id -> cluster assignment."""

    k: int
    ids: tuple[str, ...]
    labels: np.ndarray  # int64, aligned with ids
    centroids: np.ndarray  # float64, (k, d_emb)
    inertia: float
    seed: int
    inertia_history: tuple[float, ...] = ()

    @property
    def assignment(self) -> dict[str, int]:
        return dict(zip(self.ids, (int(c) for c in self.labels)))

    def counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)


@dataclass(frozen=True)
class KCandidate:
    k: int
    silhouette: float
    inertia: float
    seed: int


@dataclass(frozen=True)
class KSelectionReport:
    candidates: tuple[KCandidate, ...]
    chosen_k: int


def _as_matrix(embeddings, normalize: bool = False) -> np.ndarray:
    X = np.ascontiguousarray(np.asarray(embeddings, dtype=np.float64))
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("embeddings must be a non-empty 2-D array")
    if not np.all(np.isfinite(X)):
        raise ValueError("embeddings contain non-finite values")
    if normalize:
        norms = np.linalg.norm(X, axis=1, keepdims=True)
        if np.any(norms == 0):
            raise ValueError("cannot unit-normalize a zero embedding")
        X = X / norms
    return X


def _plusplus_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: squared-distance-weighted center choices."""
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    idx = int(rng.integers(n))
    centers[0] = X[idx]
    d2 = np.einsum("ij,ij->i", X - centers[0], X - centers[0])
    for c in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))  # all points coincide with a center
        centers[c] = X[idx]
        d2 = np.minimum(d2, np.einsum("ij,ij->i", X - centers[c], X - centers[c]))
    return centers


def _repair_empty(X, labels, sqdists, centroids, k):
    """Give each empty cluster the point farthest from its centroid.

    If every point already sits on a centroid (duplicate-heavy data), a
    point is taken from any cluster holding at least two, so no cluster is
    ever left empty.
    """
    counts = np.bincount(labels, minlength=k)
    while True:
        empties = np.flatnonzero(counts == 0)
        if len(empties) == 0:
            break
        far = int(np.argmax(sqdists))
        if sqdists[far] == 0.0:
            donors = np.flatnonzero(counts >= 2)
            far = int(np.flatnonzero(labels == donors[0])[0])
        counts[labels[far]] -= 1
        labels[far] = int(empties[0])
        counts[empties[0]] += 1
        centroids[empties[0]] = X[far]
        sqdists[far] = 0.0
    return labels, sqdists, centroids


def kmeans(embeddings, k: int, seed: int, max_iters: int = 300, tol: float = 1e-4,
           ids=None, normalize: bool = False) -> Partition:
    """Lloyd's algorithm from a k-means++ start.

    Stops when the largest centroid movement falls below ``tol`` or after
    ``max_iters`` passes. Within-run inertia is checked to be non-increasing
    at every iteration. Deterministic for a fixed seed.
    """
    X = _as_matrix(embeddings, normalize)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} must be in [1, {n}] for {n} points")
    if ids is None:
        ids = tuple(str(i) for i in range(n))
    else:
        ids = tuple(str(i) for i in ids)
        if len(ids) != n:
            raise ValueError("ids and embeddings disagree in length")

    rng = np.random.default_rng(seed)
    centroids = _plusplus_init(X, k, rng)
    history: list[float] = []
    prev_inertia = np.inf
    labels = np.zeros(n, dtype=np.int64)
    converged = False
    it = 0
    while it < max_iters:
        labels, sqdists = _kernels.assign_points(X, centroids)
        labels, sqdists, centroids = _repair_empty(X, labels, sqdists, centroids, k)
        inertia = float(sqdists.sum())
        if not inertia <= prev_inertia + 1e-9 * max(1.0, abs(prev_inertia)):
            raise AssertionError(
                f"inertia increased at iteration {it}: {prev_inertia} -> {inertia}"
            )
        history.append(inertia)
        prev_inertia = inertia
        new_centroids = centroids.copy()
        for c in range(k):
            members = labels == c
            if members.any():
                new_centroids[c] = X[members].mean(axis=0)
        movement = float(np.linalg.norm(new_centroids - centroids, axis=1).max())
        if movement < tol:
            converged = True  # keep centroids consistent with current labels
            break
        centroids = new_centroids
        it += 1
    if not converged:
        # max_iters exhausted after a centroid update: refresh the assignment
        labels, sqdists = _kernels.assign_points(X, centroids)
        labels, sqdists, centroids = _repair_empty(X, labels, sqdists, centroids, k)
        inertia = float(sqdists.sum())
        history.append(inertia)
    return Partition(
        k=k,
        ids=ids,
        labels=labels,
        centroids=centroids,
        inertia=history[-1],
        seed=seed,
        inertia_history=tuple(history),
    )


def silhouette(embeddings, partition: Partition, sample_cap: int | None = 2048) -> float:
    """Mean silhouette score of the partition over the given embeddings.

    For point i with own-cluster mean distance a and smallest foreign-cluster
    mean distance b, s(i) = (b - a) / max(a, b); singleton clusters score 0.
    When more than ``sample_cap`` points are present, a seeded subsample of
    that size is scored (``sample_cap=None`` forces the exact computation).
    """
    X = _as_matrix(embeddings)
    if partition.k < 2:
        raise ValueError("silhouette requires at least 2 clusters")
    labels = np.asarray(partition.labels, dtype=np.int64)
    if labels.shape[0] != X.shape[0]:
        raise ValueError("partition does not cover the embeddings")
    n = X.shape[0]
    if sample_cap is not None and n > sample_cap:
        rng = substream(partition.seed, "silhouette")
        sample_idx = np.sort(rng.choice(n, size=sample_cap, replace=False))
    else:
        sample_idx = np.arange(n)
    sample_idx = np.ascontiguousarray(sample_idx, dtype=np.int64)
    counts = np.bincount(labels, minlength=partition.k)
    if np.any(counts == 0):
        raise ValueError("partition has an empty cluster")
    means = _kernels.cluster_mean_distances(X, labels, partition.k, sample_idx)
    scores = np.empty(len(sample_idx))
    for row, idx in enumerate(sample_idx):
        own = labels[idx]
        if counts[own] == 1:
            scores[row] = 0.0
            continue
        a = means[row, own]
        others = np.delete(means[row], own)
        b = float(others.min())
        denom = max(a, b)
        scores[row] = 0.0 if denom == 0.0 else (b - a) / denom
    return float(scores.mean())


def select_k(embeddings, k_candidates, seed: int, sample_cap: int | None = 2048,
             ids=None, normalize: bool = False,
             max_iters: int = 300, tol: float = 1e-4):
    """Cluster at every candidate k and keep the best silhouette.

    Exact silhouette ties break toward the smaller k. Returns
    (best Partition, KSelectionReport).
    """
    k_candidates = list(k_candidates)
    if not k_candidates:
        raise ValueError("k_candidates must be non-empty")
    best: Partition | None = None
    best_row: KCandidate | None = None
    rows = []
    for k in k_candidates:
        part = kmeans(embeddings, k, seed=seed, max_iters=max_iters, tol=tol,
                      ids=ids, normalize=normalize)
        score = silhouette(embeddings, part, sample_cap=sample_cap)
        row = KCandidate(k=k, silhouette=score, inertia=part.inertia, seed=seed)
        rows.append(row)
        if (
            best_row is None
            or score > best_row.silhouette
            or (score == best_row.silhouette and k < best_row.k)
        ):
            best, best_row = part, row
    report = KSelectionReport(candidates=tuple(rows), chosen_k=best_row.k)
    return best, report


def assign_to_nearest(centroids: np.ndarray, queries) -> np.ndarray:
    """Nearest-centroid cluster index for each query (ties: lowest index)."""
    C = np.ascontiguousarray(np.asarray(centroids, dtype=np.float64))
    Q = _as_matrix(queries)
    if C.ndim != 2 or C.shape[0] == 0:
        raise ValueError("centroids must be a non-empty 2-D array")
    if C.shape[1] != Q.shape[1]:
        raise ValueError(
            f"dimension mismatch: centroids d={C.shape[1]}, queries d={Q.shape[1]}"
        )
    labels, _ = _kernels.assign_points(Q, C)
    return labels


def extend_to_eval(corpus, partition: Partition) -> Partition:
    """Return a partition that also assigns the corpus's eval examples."""
    known = set(partition.ids)
    extra = [ex for ex in corpus.eval_examples if ex.id not in known]
    if not extra:
        return partition
    queries = np.ascontiguousarray([ex.embedding for ex in extra], dtype=np.float64)
    labels = assign_to_nearest(partition.centroids, queries)
    return Partition(
        k=partition.k,
        ids=partition.ids + tuple(ex.id for ex in extra),
        labels=np.concatenate([partition.labels, labels]),
        centroids=partition.centroids,
        inertia=partition.inertia,
        seed=partition.seed,
        inertia_history=partition.inertia_history,
    )


def save_partition(partition: Partition, path) -> None:
    path = Path(path)
    header = {
        "k": partition.k,
        "d_emb": int(partition.centroids.shape[1]),
        "seed": partition.seed,
        "inertia": partition.inertia,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for row in partition.centroids:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
        for ex_id, cluster in zip(partition.ids, partition.labels):
            fh.write(f"{ex_id}\t{int(cluster)}\n")


def load_partition(path) -> Partition:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"partition file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    header = json.loads(lines[0])
    k, d_emb = int(header["k"]), int(header["d_emb"])
    centroids = np.empty((k, d_emb))
    for c in range(k):
        vals = lines[1 + c].split()
        if len(vals) != d_emb:
            raise ValueError(f"centroid line {c} has {len(vals)} values, want {d_emb}")
        centroids[c] = [float(v) for v in vals]
    ids, labels = [], []
    for ln in lines[1 + k :]:
        ex_id, _, cluster = ln.rpartition("\t")
        ids.append(ex_id)
        labels.append(int(cluster))
    return Partition(
        k=k,
        ids=tuple(ids),
        labels=np.asarray(labels, dtype=np.int64),
        centroids=centroids,
        inertia=float(header["inertia"]),
        seed=int(header["seed"]),
    )
