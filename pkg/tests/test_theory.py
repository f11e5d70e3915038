"""Validators for the regrouping/rebalancing supporting results."""

import itertools

import numpy as np
import pytest

from gradmix.theory import (
    AlignmentInstance,
    eta_bound,
    greedy_dominates,
    is_stable,
    regret_bound,
    regret_exact,
    swap_improves,
)


def regret_enumeration_oracle(d_i, d_j):
    """Literal definition: best same-size subset of the pooled values."""
    pool = list(d_i) + list(d_j)
    n = len(d_i)
    best = max(
        sum(subset) / n for subset in itertools.combinations(pool, n)
    )
    return max(0.0, best - sum(d_i) / n)


def random_instance(rng, n=None):
    n = n or int(rng.integers(1, 7))
    a = rng.normal(rng.normal(), 1.0, size=n)
    b = rng.normal(rng.normal(), 1.0, size=n)
    if a.mean() < b.mean():
        a, b = b, a
    return AlignmentInstance.from_lists([a, b])


class TestRegretExact:
    def test_matches_exhaustive_enumeration(self, rng):
        for _ in range(200):
            inst = random_instance(rng)
            got = regret_exact(inst, 0, 1)
            want = regret_enumeration_oracle(inst.clusters[0], inst.clusters[1])
            assert abs(got - want) <= 1e-12

    def test_hand_example_half(self):
        inst = AlignmentInstance.from_lists([[2.0, 4.0], [1.0, 3.0]])
        assert regret_exact(inst, 0, 1) == 0.5

    def test_already_optimal_cluster_has_zero_regret(self):
        inst = AlignmentInstance.from_lists([[3.0, 3.0], [1.0, 1.0]])
        assert regret_exact(inst, 0, 1) == 0.0

    def test_never_negative(self, rng):
        for _ in range(100):
            inst = random_instance(rng)
            assert regret_exact(inst, 0, 1) >= 0.0
            assert regret_exact(inst, 1, 0) >= 0.0

    def test_unequal_sizes_rejected(self):
        inst = AlignmentInstance.from_lists([[1.0, 2.0], [3.0]])
        with pytest.raises(ValueError, match="equal sizes"):
            regret_exact(inst, 0, 1)


class TestRegretBound:
    def test_hand_example_tight(self):
        inst = AlignmentInstance.from_lists([[2.0, 4.0], [1.0, 3.0]])
        res = regret_bound(inst, 0, 1)
        assert res.regret == 0.5
        assert res.bound == 0.5  # radii 1 and 1, gap 1
        assert res.radius_i == 1.0 and res.radius_j == 1.0
        assert res.mean_gap == 1.0
        assert not res.violated

    def test_zero_radius_clusters(self):
        inst = AlignmentInstance.from_lists([[3.0, 3.0], [1.0, 1.0]])
        res = regret_bound(inst, 0, 1)
        assert res.bound == 0.0 and res.regret == 0.0

    def test_never_violated_on_random_instances(self, rng):
        violations = 0
        for _ in range(1000):
            res = regret_bound(random_instance(rng), 0, 1)
            violations += res.violated
        assert violations == 0

    def test_orientation_enforced(self):
        inst = AlignmentInstance.from_lists([[1.0, 1.0], [5.0, 5.0]])
        with pytest.raises(ValueError, match="larger mean"):
            regret_bound(inst, 0, 1)
        assert not regret_bound(inst, 1, 0).violated


class TestStability:
    def test_separated_clusters_are_stable(self):
        inst = AlignmentInstance.from_lists([[5.0, 6.0], [1.0, 2.0]])
        assert is_stable(inst)

    def test_interleaved_clusters_are_not(self):
        inst = AlignmentInstance.from_lists([[5.0, 1.0], [4.0, 2.0]])
        assert not is_stable(inst)

    def test_boundary_tie_counts_as_stable(self):
        inst = AlignmentInstance.from_lists([[4.0, 3.0], [3.0, 1.0]])
        assert is_stable(inst)

    def test_needs_two_clusters(self):
        with pytest.raises(ValueError, match="at least 2"):
            is_stable(AlignmentInstance.from_lists([[1.0]]))

    def test_stable_implies_zero_regret(self, rng):
        for _ in range(100):
            m = int(rng.integers(2, 5))
            n = int(rng.integers(1, 5))
            values = np.sort(rng.normal(0.0, 1.0, size=m * n))[::-1]
            chunks = [values[c * n : (c + 1) * n] for c in range(m)]
            inst = AlignmentInstance.from_lists(chunks)
            assert is_stable(inst)
            for j in range(1, m):
                assert regret_exact(inst, 0, j) == 0.0

    def test_swap_improves(self):
        assert swap_improves(1.0, 2.0)
        assert not swap_improves(2.0, 1.0)
        assert not swap_improves(2.0, 2.0)


class TestEtaBound:
    def test_hand_example(self):
        g = np.array([[1.0, 0.0], [0.0, 0.0]])
        p = np.array([1.0, 0.0])
        p_alt = np.array([0.0, 1.0])
        # scores max 1, alternative alignment 0, denom 1 + 0, L = 2
        assert eta_bound(g, p, p_alt, smoothness=2.0) == 0.5

    def test_joint_scaling_property(self, rng):
        g = rng.standard_normal((4, 6))
        p = rng.dirichlet(np.ones(4))
        p_alt = rng.dirichlet(np.ones(4))
        base = eta_bound(g, p, p_alt, smoothness=1.7)
        for c in (0.5, 10.0):
            scaled = eta_bound(c * g, p, p_alt, smoothness=c * 1.7)
            np.testing.assert_allclose(scaled, base / c, rtol=1e-12, atol=0)

    def test_non_negative(self, rng):
        for _ in range(100):
            m = int(rng.integers(2, 6))
            g = rng.standard_normal((m, int(rng.integers(1, 8))))
            p = rng.dirichlet(np.ones(m))
            p_alt = rng.dirichlet(np.ones(m))
            assert eta_bound(g, p, p_alt, smoothness=1.0) >= 0.0

    def test_validation(self, rng):
        g = rng.standard_normal((3, 4))
        p = np.full(3, 1 / 3)
        with pytest.raises(ValueError, match="smoothness"):
            eta_bound(g, p, p, smoothness=0.0)
        with pytest.raises(ValueError, match="one entry per gradient"):
            eta_bound(g, np.array([0.5, 0.5]), p, smoothness=1.0)
        with pytest.raises(ValueError, match="zero"):
            eta_bound(np.zeros((3, 4)), p, p, smoothness=1.0)
        with pytest.raises(ValueError, match="\\(m, d\\)"):
            eta_bound(np.zeros(4), p, p, smoothness=1.0)


def analytic_decrease(direction, g_p, smoothness, step):
    """Closed-form quadratic-family loss drop for a step along -direction."""
    d = np.asarray(direction)
    return step * float(d @ g_p) - 0.5 * step * step * smoothness * float(d @ d)


class TestGreedyDominates:
    def _random_setup(self, rng):
        m = int(rng.integers(2, 6))
        d = int(rng.integers(1, 11))
        g = rng.standard_normal((m, d))
        p = rng.dirichlet(np.ones(m))
        p_alt = rng.dirichlet(np.ones(m))
        L = float(rng.uniform(0.3, 4.0))
        return g, p, p_alt, L

    def test_decreases_match_closed_form(self, rng):
        for _ in range(50):
            g, p, p_alt, L = self._random_setup(rng)
            bound = eta_bound(g, p, p_alt, L)
            step = 0.5 * bound if bound > 0 else 0.1
            res = greedy_dominates(g, p, p_alt, L, step_size=step)
            g_p = g.T @ p
            greedy_dir = g[int(np.argmax(g @ g_p))]
            alt_dir = g.T @ p_alt
            np.testing.assert_allclose(
                res.decrease_max_corner,
                analytic_decrease(greedy_dir, g_p, L, step),
                rtol=1e-9, atol=1e-12,
            )
            np.testing.assert_allclose(
                res.decrease_alternative,
                analytic_decrease(alt_dir, g_p, L, step),
                rtol=1e-9, atol=1e-12,
            )

    def test_dominates_at_half_bound(self, rng):
        for _ in range(200):
            g, p, p_alt, L = self._random_setup(rng)
            bound = eta_bound(g, p, p_alt, L)
            res = greedy_dominates(g, p, p_alt, L, step_size=bound / 2)
            assert res.eta_within_bound
            assert (res.decrease_max_corner - res.decrease_alternative
                    >= -1e-9)
            assert res.dominates or (
                res.decrease_alternative - res.decrease_max_corner <= 1e-9
            )

    def test_dominates_at_full_bound(self, rng):
        for _ in range(200):
            g, p, p_alt, L = self._random_setup(rng)
            bound = eta_bound(g, p, p_alt, L)
            res = greedy_dominates(g, p, p_alt, L, step_size=bound)
            assert (res.decrease_max_corner - res.decrease_alternative
                    >= -1e-9)

    def test_one_hot_alternative_on_greedy_corner_ties_exactly(self, rng):
        g = rng.standard_normal((3, 4))
        p = rng.dirichlet(np.ones(3))
        greedy_idx = int(np.argmax(g @ (g.T @ p)))
        p_alt = np.zeros(3)
        p_alt[greedy_idx] = 1.0
        res = greedy_dominates(g, p, p_alt, smoothness=1.0, step_size=0.2)
        assert res.decrease_max_corner == res.decrease_alternative
        assert res.dominates

    def test_beyond_bound_is_reported_not_raised(self, rng):
        g, p, p_alt, L = self._random_setup(rng)
        bound = eta_bound(g, p, p_alt, L)
        res = greedy_dominates(g, p, p_alt, L, step_size=bound * 1.5 + 1.0)
        assert not res.eta_within_bound

    def test_zero_step_gives_zero_decreases(self, rng):
        g, p, p_alt, L = self._random_setup(rng)
        res = greedy_dominates(g, p, p_alt, L, step_size=0.0)
        assert res.decrease_max_corner == 0.0
        assert res.decrease_alternative == 0.0
        assert res.dominates


class TestAlignmentInstance:
    def test_from_lists_validation(self):
        with pytest.raises(ValueError, match="at least one"):
            AlignmentInstance.from_lists([[1.0], []])
        with pytest.raises(ValueError, match="finite"):
            AlignmentInstance.from_lists([[np.inf], [1.0]])
        with pytest.raises(ValueError, match="at least one"):
            AlignmentInstance.from_lists([])

    def test_mean(self):
        inst = AlignmentInstance.from_lists([[1.0, 3.0], [5.0]])
        assert inst.mean(0) == 2.0 and inst.mean(1) == 5.0
