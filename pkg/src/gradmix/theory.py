"""Numerical validators for the method's supporting results.

Works over scalar "alignment" instances: each cluster holds the inner
products of its members' gradients with a fixed evaluation direction, so
set-level alignment is just the mean of member alignments. The validators
check, with exact small-scale arithmetic:

  * how much reshuffling points between two clusters can raise one
    cluster's alignment (regret), and a radius/gap upper bound for it;
  * that a partition where the top cluster's worst member beats every
    other cluster's best member admits no improving swap;
  * that under quadratic per-domain losses a greedy step on the most
    similarity-aligned domain decreases eval loss at least as much as any
    alternative mixture step, provided the step size respects a bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gradmix.balance import check_simplex


@dataclass(frozen=True, eq=False)
class AlignmentInstance:
    """Scalar alignment values grouped by cluster (eval direction applied)."""

    clusters: tuple[np.ndarray, ...]

    @classmethod
    def from_lists(cls, clusters) -> "AlignmentInstance":
        arrays = tuple(np.asarray(c, dtype=np.float64) for c in clusters)
        if len(arrays) < 1 or any(a.ndim != 1 or a.size == 0 for a in arrays):
            raise ValueError("each cluster needs at least one alignment value")
        if any(not np.all(np.isfinite(a)) for a in arrays):
            raise ValueError("alignments must be finite")
        return cls(clusters=arrays)

    def mean(self, i: int) -> float:
        return float(self.clusters[i].mean())


@dataclass(frozen=True)
class RegretResult:
    regret: float
    bound: float
    radius_i: float
    radius_j: float
    mean_gap: float

    @property
    def violated(self) -> bool:
        return self.regret > self.bound + 1e-12


def regret_exact(instance: AlignmentInstance, i: int, j: int) -> float:
    """Best achievable alignment gain for cluster i using the i/j pool.

    Over all same-size subsets of clusters i and j combined, the maximal
    mean alignment minus cluster i's current mean. Since the mean of a set
    is maximized by its largest members, this is the mean of the |D_i|
    largest pooled values. Never negative (the current set is a candidate).
    """
    d_i, d_j = instance.clusters[i], instance.clusters[j]
    if d_i.size != d_j.size:
        raise ValueError("clusters i and j must have equal sizes")
    pool = np.concatenate([d_i, d_j])
    top = np.sort(pool)[-d_i.size :]
    if np.array_equal(top, np.sort(d_i)):
        return 0.0  # the current set is already optimal; avoid order noise
    return max(0.0, float(top.mean() - d_i.mean()))


def regret_bound(instance: AlignmentInstance, i: int, j: int) -> RegretResult:
    """Radius/gap bound on the exact regret: max(0, (r_i + r_j - gap) / 2).

    r_i and r_j are the largest absolute deviations from each cluster's
    mean alignment and gap is mean_i - mean_j, required to be >= 0 (pass
    the higher-mean cluster first).
    """
    d_i, d_j = instance.clusters[i], instance.clusters[j]
    if d_i.size != d_j.size:
        raise ValueError("clusters i and j must have equal sizes")
    mean_i, mean_j = float(d_i.mean()), float(d_j.mean())
    if mean_i < mean_j:
        raise ValueError("cluster i must have the larger mean alignment")
    r_i = float(np.abs(d_i - mean_i).max())
    r_j = float(np.abs(d_j - mean_j).max())
    gap = mean_i - mean_j
    bound = max(0.0, 0.5 * (r_i + r_j - gap))
    return RegretResult(
        regret=regret_exact(instance, i, j),
        bound=bound,
        radius_i=r_i,
        radius_j=r_j,
        mean_gap=gap,
    )


def swap_improves(alignment_out: float, alignment_in: float) -> bool:
    """Does swapping a member out for a candidate raise the cluster mean?"""
    return alignment_in > alignment_out


def is_stable(instance: AlignmentInstance) -> bool:
    """No single swap can improve the best-aligned cluster.

    True iff the argmax-mean cluster's minimum alignment is at least every
    other cluster's maximum alignment.
    """
    if len(instance.clusters) < 2:
        raise ValueError("stability needs at least 2 clusters")
    means = [c.mean() for c in instance.clusters]
    top = int(np.argmax(means))
    low = instance.clusters[top].min()
    return all(
        low >= c.max() for idx, c in enumerate(instance.clusters) if idx != top
    )


@dataclass(frozen=True)
class GreedyStepResult:
    dominates: bool
    decrease_max_corner: float
    decrease_alternative: float
    eta_bound: float
    eta_within_bound: bool


def _mixture_gradient(gradients: np.ndarray, p: np.ndarray) -> np.ndarray:
    return gradients.T @ p


def eta_bound(gradients, p, p_alt, smoothness: float) -> float:
    """Largest step size for which the greedy-step guarantee is proved.

    (1/L) * (max_i g_i.g_p - g_alt.g_p) / (max_i ||g_i||^2 + ||g_alt||^2)
    with g_p the p-mixture gradient and g_alt the alternative mixture's.
    Non-negative because the numerator compares a max against a convex
    combination of the same scores.
    """
    g = np.asarray(gradients, dtype=np.float64)
    if g.ndim != 2:
        raise ValueError("gradients must be (m, d)")
    p = check_simplex(p)
    p_alt = check_simplex(p_alt)
    if p.size != g.shape[0] or p_alt.size != g.shape[0]:
        raise ValueError("weight vectors must have one entry per gradient")
    if smoothness <= 0:
        raise ValueError("smoothness must be positive")
    g_p = _mixture_gradient(g, p)
    g_alt = _mixture_gradient(g, p_alt)
    scores = g @ g_p
    denom = float((g * g).sum(axis=1).max() + g_alt @ g_alt)
    if denom == 0.0:
        raise ValueError("all gradients are zero; the bound is undefined")
    return max(0.0, float(scores.max() - g_alt @ g_p)) / (smoothness * denom)


def greedy_dominates(gradients, p, p_alt, smoothness: float,
                     step_size: float) -> GreedyStepResult:
    """Compare one greedy step against an alternative-mixture step.

    The per-domain losses are the quadratic family L_i(x) = (L/2)
    ||x - x_i*||^2 whose gradients at the origin equal the given vectors
    (x_i* = -g_i / L), evaluated in closed form. The greedy step follows
    the domain with the highest similarity score (G p); the alternative
    follows the p_alt mixture gradient. ``dominates`` reports whether the
    greedy step decreased the p-weighted loss at least as much; the
    guarantee only holds when step_size is within eta_bound, which is
    reported via ``eta_within_bound`` rather than raised.
    """
    g = np.asarray(gradients, dtype=np.float64)
    p = check_simplex(p)
    p_alt = check_simplex(p_alt)
    L = float(smoothness)
    bound = eta_bound(g, p, p_alt, L)
    g_p = _mixture_gradient(g, p)
    scores = g @ g_p
    greedy_dir = g[int(np.argmax(scores))]
    alt_dir = _mixture_gradient(g, p_alt)

    minimizers = -g / L  # gradient of L_i at the origin equals g_i

    def loss_p(x: np.ndarray) -> float:
        diff = x[None, :] - minimizers
        return 0.5 * L * float(p @ np.einsum("ij,ij->i", diff, diff))

    base = loss_p(np.zeros(g.shape[1]))
    dec_greedy = base - loss_p(-step_size * greedy_dir)
    dec_alt = base - loss_p(-step_size * alt_dir)
    return GreedyStepResult(
        dominates=dec_greedy >= dec_alt,
        decrease_max_corner=dec_greedy,
        decrease_alternative=dec_alt,
        eta_bound=bound,
        eta_within_bound=step_size <= bound,
    )
