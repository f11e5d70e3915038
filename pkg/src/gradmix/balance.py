"""Mixture-weight updates driven by per-domain gradient similarity.

Per-domain gradients are accumulated as sums with sample counts; the Gram
matrix of their means, G[i, j] = (grad_sum[i] / n_i) . (grad_sum[j] / n_j),
measures how much training on domain i helps domain j. The main update maps
eval-weighted similarity scores through a temperature-controlled softmax:

    p_next = softmax(lam * G p / ||G p||_2)

A multiplicative-weights update over the same scores is provided as a
baseline, as is plain stratified (uniform) weighting.
"""

from __future__ import annotations

import numpy as np

SIMPLEX_TOL = 1e-12


def check_simplex(p, tol: float = SIMPLEX_TOL) -> np.ndarray:
    """Validate that p is a probability vector; returns it as float64."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("weights must be a non-empty 1-D vector")
    if not np.all(np.isfinite(p)):
        raise ValueError("weights contain non-finite entries")
    if p.min() < 0.0:
        raise ValueError(f"weights must be non-negative, got min {p.min()}")
    if abs(p.sum() - 1.0) > tol:
        raise ValueError(f"weights sum to {p.sum()!r}, not 1")
    return p


class GradientAccumulator:
    """Running per-domain sums of final-layer gradients with sample counts."""

    def __init__(self, num_domains: int, dim: int):
        if num_domains < 1 or dim < 1:
            raise ValueError("num_domains and dim must be >= 1")
        self.num_domains = num_domains
        self.dim = dim
        self.grad_sum = np.zeros((num_domains, dim))
        self.sample_count = np.zeros(num_domains, dtype=np.int64)

    def add(self, domain: int, summed_grad: np.ndarray, count: int) -> None:
        """Add the summed gradient of ``count`` examples from one domain."""
        if not 0 <= domain < self.num_domains:
            raise ValueError(f"domain {domain} out of range")
        if count < 1:
            raise ValueError("count must be >= 1")
        g = np.asarray(summed_grad, dtype=np.float64).ravel()
        if g.shape[0] != self.dim:
            raise ValueError(f"gradient has dim {g.shape[0]}, accumulator {self.dim}")
        self.grad_sum[domain] += g
        self.sample_count[domain] += count

    def reset(self) -> None:
        self.grad_sum[:] = 0.0
        self.sample_count[:] = 0


def gram(acc: GradientAccumulator) -> np.ndarray:
    """Mean-gradient Gram matrix; domains with zero samples give zero rows.

    Symmetric by construction and positive semidefinite up to rounding.
    """
    means = np.zeros_like(acc.grad_sum)
    seen = acc.sample_count > 0
    means[seen] = acc.grad_sum[seen] / acc.sample_count[seen, None]
    G = means @ means.T
    G = (G + G.T) / 2.0  # exact symmetry regardless of BLAS path
    if not np.all(np.isfinite(G)):
        raise FloatingPointError("gram matrix has non-finite entries")
    return G


def randb_update(G: np.ndarray, p_eval, lam: float = 3.0,
                 eta: float = 1.0) -> np.ndarray | None:
    """Softmax reweighting of domains by eval-weighted gradient similarity.

    Computes softmax(eta * lam * G p / ||G p||_2). The normalization makes
    the update invariant to rescaling G. Returns None when ||G p||_2 == 0
    (nothing was sampled, or all gradients vanished); the caller keeps its
    previous weights in that case. ``eta`` is an optional extra step-size
    multiplier and defaults to the plain normalized form.
    """
    p = check_simplex(p_eval)
    if lam <= 0:
        raise ValueError("lam must be positive")
    if eta <= 0:
        raise ValueError("eta must be positive")
    G = np.asarray(G, dtype=np.float64)
    if G.shape != (p.size, p.size):
        raise ValueError(f"G has shape {G.shape}, expected {(p.size, p.size)}")
    v = G @ p
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return None
    z = (eta * lam / norm) * v
    z -= z.max()  # overflow guard; cancels in the ratio
    e = np.exp(z)
    return e / e.sum()


def multiplicative_weights_update(state, G: np.ndarray, p_eval,
                                  eta: float, mu: float) -> np.ndarray:
    """Exponentiated-gradient baseline over the same similarity scores.

    p_next is proportional to state * exp(eta * (G p_eval) / mu). Two
    consecutive updates with the same scores compose into a single update
    with doubled eta.
    """
    state = check_simplex(state)
    p = check_simplex(p_eval)
    if mu <= 0:
        raise ValueError("mu must be positive")
    z = (eta / mu) * (np.asarray(G, dtype=np.float64) @ p)
    if not np.all(np.isfinite(z)):
        raise FloatingPointError("similarity scores are non-finite")
    z -= z.max()
    w = state * np.exp(z)
    total = w.sum()
    if total <= 0.0:
        raise FloatingPointError("multiplicative weights collapsed to zero")
    return w / total


def stratified_weights(m: int) -> np.ndarray:
    """Uniform weights over m domains, summing to exactly 1.0."""
    if m < 1:
        raise ValueError("m must be >= 1")
    w = np.full(m, 1.0 / m)
    w[-1] = 1.0 - w[:-1].sum()
    # Pairwise summation can still land one ulp off; nudge the last entry
    # until the array total rounds to exactly 1.0.
    for _ in range(4):
        err = 1.0 - w.sum()
        if err == 0.0:
            break
        w[-1] += err
    return w
