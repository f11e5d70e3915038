"""Shared builders and brute-force oracles for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from gradmix.corpus import Corpus, Example


def gaussian_blobs(rng, centers, sigma, n_per):
    """Sample n_per points around each center; returns (X, blob_index)."""
    centers = np.asarray(centers, dtype=np.float64)
    X, labels = [], []
    for c, center in enumerate(centers):
        X.append(rng.normal(center, sigma, size=(n_per, centers.shape[1])))
        labels.append(np.full(n_per, c))
    return np.vstack(X), np.concatenate(labels)


def separated_centers(k, d, separation=6.0):
    """k centers with pairwise distance >= separation (axis-aligned)."""
    if k > d:
        raise ValueError("need d >= k for axis-aligned centers")
    centers = np.zeros((k, d))
    for c in range(k):
        centers[c, c] = separation / np.sqrt(2.0)  # pairwise distance = separation
    return centers


def silhouette_oracle(X, labels) -> float:
    """Definition-level silhouette: per-point loops, no shared code path."""
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    clusters = np.unique(labels)
    scores = []
    for i in range(len(X)):
        own = labels[i]
        own_members = np.flatnonzero(labels == own)
        if len(own_members) == 1:
            scores.append(0.0)
            continue
        a = np.mean(
            [np.linalg.norm(X[i] - X[j]) for j in own_members if j != i]
        )
        b = min(
            np.mean([np.linalg.norm(X[i] - X[j]) for j in np.flatnonzero(labels == c)])
            for c in clusters
            if c != own
        )
        denom = max(a, b)
        scores.append(0.0 if denom == 0 else (b - a) / denom)
    return float(np.mean(scores))


def single_example_grad_oracle(model, X, y):
    """Final-layer weight gradients one example at a time (naive route)."""
    from gradmix.trainer import loss_and_backward

    outs = []
    for i in range(len(X)):
        target = y[i : i + 1] if np.asarray(y).ndim == 1 else y[i : i + 1, :]
        bp = loss_and_backward(model, X[i : i + 1], target)
        outs.append(bp.grads.weights[-1])
    return np.stack(outs)


def finite_difference_gradient(model, X, y, step=1e-5):
    """Central-difference gradient of the summed loss over all parameters."""
    from gradmix.trainer import (
        get_parameter_vector,
        loss_and_backward,
        set_parameter_vector,
    )

    theta = get_parameter_vector(model)
    grad = np.empty_like(theta)
    for i in range(theta.size):
        bumped = theta.copy()
        bumped[i] = theta[i] + step
        set_parameter_vector(model, bumped)
        hi = loss_and_backward(model, X, y).loss
        bumped[i] = theta[i] - step
        set_parameter_vector(model, bumped)
        lo = loss_and_backward(model, X, y).loss
        grad[i] = (hi - lo) / (2.0 * step)
    set_parameter_vector(model, theta)
    return grad


def build_corpus(train_X, train_labels, eval_X, eval_labels, token_counts=None):
    """Corpus from arrays; labels are strings or ints (stringified)."""
    examples = []
    for i, (x, lab) in enumerate(zip(train_X, train_labels)):
        tokens = 1 if token_counts is None else int(token_counts[i])
        examples.append(
            Example(
                id=f"tr{i}", embedding=np.asarray(x, dtype=np.float64),
                domain_label=str(lab), split="train", token_count=tokens,
            )
        )
    for i, (x, lab) in enumerate(zip(eval_X, eval_labels)):
        examples.append(
            Example(
                id=f"ev{i}", embedding=np.asarray(x, dtype=np.float64),
                domain_label=str(lab), split="eval", token_count=1,
            )
        )
    return Corpus.from_examples(examples)


def noisy_domain_corpus(seed, n_train_per=60, n_eval_per=25, d=6,
                        sigma=0.25, separation=6.0, noisy_blob=3):
    """Four separated blobs; one blob's labels are uniform noise.

    Train: n_train_per examples per blob, labeled by blob except the noisy
    one, whose labels are drawn uniformly from all four. Eval: clean blobs
    only, correctly labeled.
    """
    rng = np.random.default_rng(seed)
    centers = np.zeros((4, d))
    for c in range(4):
        centers[c, c] = separation
    names = [f"d{c}" for c in range(4)]
    examples = []
    for c in range(4):
        pts = rng.normal(centers[c], sigma, size=(n_train_per, d))
        for i, x in enumerate(pts):
            label = names[c] if c != noisy_blob else names[int(rng.integers(4))]
            examples.append(
                Example(id=f"tr-{c}-{i}", embedding=x, domain_label=label,
                        split="train", token_count=1)
            )
    for c in range(4):
        if c == noisy_blob:
            continue
        pts = rng.normal(centers[c], sigma, size=(n_eval_per, d))
        for i, x in enumerate(pts):
            examples.append(
                Example(id=f"ev-{c}-{i}", embedding=x, domain_label=names[c],
                        split="eval", token_count=1)
            )
    return Corpus.from_examples(examples)


@pytest.fixture
def rng():
    return np.random.default_rng(42)
