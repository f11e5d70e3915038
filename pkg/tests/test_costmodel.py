"""FLOPs accounting: hand-checked totals, column consistency, crossover."""

import numpy as np
import pytest

from gradmix.costmodel import (
    METHODS,
    PROSE_VARIANT_METHODS,
    CostParams,
    columns_consistent,
    compare,
    prose_total_flops,
    relative_overhead,
    total_flops,
)

# Small parameter set where every formula is checkable by hand:
# N=100, D_t=1000, D_e=50, m=4, T=5, delta=0.1.
HAND = CostParams(N=100, D_t=1000, D_e=50, m=4, T=5, delta=0.1)

HAND_TOTALS = {
    # 6 * 1000 * 100
    "standard": 600_000.0,
    # 6 * (1 + 4*0.1) * 1000 * 100 + 2 * (5+4) * 50 * 100
    "skill_it": 840_000.0 + 90_000.0,
    # 6 * 1000 * 100 + 2 * 5 * 4 * 50 * 100
    "aioli": 600_000.0 + 200_000.0,
    # 6 * (1 + 0.4) * 1000 * 100 + 6 * 5 * 0.1 * 50 * 100
    "dga": 840_000.0 + 15_000.0,
    # 6 * 1000 * 100 + 5 * 16 * 100
    "randb": 600_000.0 + 8_000.0,
}

HAND_OVERHEADS = {
    "standard": 0.0,
    # 0.4 + 9 * 50 / 3000
    "skill_it": 0.55,
    # 5 * 4 * 50 / 3000
    "aioli": 1.0 / 3.0,
    # 0.4 + 5 * 0.1 * 50 / 1000
    "dga": 0.425,
    # 5 * 16 / 6000
    "randb": 80.0 / 6000.0,
}


class TestHandArithmetic:
    @pytest.mark.parametrize("method", METHODS)
    def test_totals(self, method):
        got = total_flops(method, HAND)
        want = HAND_TOTALS[method]
        assert abs(got - want) <= 1e-9 * want

    @pytest.mark.parametrize("method", METHODS)
    def test_overheads(self, method):
        got = relative_overhead(method, HAND)
        want = HAND_OVERHEADS[method]
        assert abs(got - want) <= 1e-9 * max(1.0, want)

    @pytest.mark.parametrize("method", METHODS)
    def test_columns_agree(self, method):
        assert columns_consistent(method, HAND)


class TestConsistencyProperty:
    def test_all_methods_consistent_across_random_params(self, rng):
        for _ in range(25):
            params = CostParams(
                N=float(rng.uniform(1e3, 1e12)),
                D_t=float(rng.uniform(1e3, 1e12)),
                D_e=float(rng.uniform(1e2, 1e9)),
                m=int(rng.integers(1, 50)),
                T=int(rng.integers(1, 100)),
                delta=float(rng.uniform(0.01, 1.0)),
            )
            for method in METHODS:
                assert columns_consistent(method, params), (method, params)

    def test_overhead_equals_extra_cost_ratio(self, rng):
        params = CostParams(N=3e7, D_t=5e8, D_e=2e6, m=9, T=12, delta=0.25)
        base = total_flops("standard", params)
        for method in METHODS:
            implied = (total_flops(method, params) - base) / base
            np.testing.assert_allclose(
                implied, relative_overhead(method, params), rtol=1e-9, atol=0
            )


class TestGramRebalanceOverhead:
    """The headline cheapness claim at production-like scale."""

    PARAMS = CostParams(N=1e8, D_t=1.6384e7, D_e=1e6, m=7, T=10)

    def test_frozen_total(self):
        # 6 * 1.6384e7 * 1e8 = 9.8304e15; 10 * 49 * 1e8 = 4.9e10
        got = total_flops("randb", self.PARAMS)
        want = 9.8304e15 + 4.9e10
        assert abs(got - want) <= 1e-9 * want

    def test_frozen_overhead(self):
        got = relative_overhead("randb", self.PARAMS)
        want = 490.0 / 98_304_000.0  # ~4.9845e-6
        assert abs(got - want) <= 1e-12 * want

    def test_same_order_as_quoted_benchmark_overhead(self):
        # reference point: six-millionths of the training budget
        got = relative_overhead("randb", self.PARAMS)
        assert 1e-6 < got < 1e-5
        assert 0.1 < got / 6e-6 < 10.0


class TestProseVariants:
    def test_available_only_for_variant_methods(self):
        for method in METHODS:
            if method in PROSE_VARIANT_METHODS:
                assert prose_total_flops(method, HAND) > 0
            else:
                with pytest.raises(ValueError, match="prose"):
                    prose_total_flops(method, HAND)

    def test_randb_prose_drops_the_round_factor(self):
        # table: 6 D_t N + T m^2 N; prose: 6 D_t N + m^2 N
        table = total_flops("randb", HAND)
        prose = prose_total_flops("randb", HAND)
        diff = (HAND.T - 1) * HAND.m**2 * HAND.N
        np.testing.assert_allclose(table - prose, diff, rtol=1e-12, atol=0)

    def test_skill_it_prose_charges_one_proxy_not_m(self):
        # table trains m proxies (m*delta); prose a single one (delta)
        table = total_flops("skill_it", HAND)
        prose = prose_total_flops("skill_it", HAND)
        diff = 6.0 * (HAND.m - 1) * HAND.delta * HAND.D_t * HAND.N
        np.testing.assert_allclose(table - prose, diff, rtol=1e-12, atol=0)

    def test_dga_prose_hand_value(self):
        # 6 * 1.1 * 1000 * 100 + 6 * 5 * (50 + 4) * 100
        want = 660_000.0 + 162_000.0
        np.testing.assert_allclose(
            prose_total_flops("dga", HAND), want, rtol=1e-12, atol=0
        )


class TestCompare:
    def test_report_shape_and_lookup(self):
        report = compare(HAND)
        assert [r.method for r in report.rows] == list(METHODS)
        assert all(r.consistent for r in report.rows)
        assert report.row("aioli").total_flops == total_flops("aioli", HAND)
        with pytest.raises(KeyError):
            report.row("nonsense")

    def test_prose_column_population(self):
        report = compare(HAND, include_prose=True)
        for r in report.rows:
            if r.method in PROSE_VARIANT_METHODS:
                assert r.prose_total_flops == prose_total_flops(r.method, HAND)
            else:
                assert r.prose_total_flops is None
        plain = compare(HAND, include_prose=False)
        assert all(r.prose_total_flops is None for r in plain.rows)

    def test_crossover_flag(self):
        base = dict(N=1e6, D_t=1e7, T=10, delta=0.1, D_e=100.0)
        assert compare(CostParams(m=7, **base)).randb_cheaper_than_dga
        assert not compare(CostParams(m=12, **base)).randb_cheaper_than_dga
        # the boundary m = sqrt(D_e) counts as not-cheaper
        assert not compare(CostParams(m=10, **base)).randb_cheaper_than_dga


class TestValidation:
    @pytest.mark.parametrize("kw", [
        dict(N=0.0),
        dict(N=float("nan")),
        dict(D_t=-1.0),
        dict(D_e=0.0),
        dict(m=0),
        dict(T=0),
        dict(delta=0.0),
        dict(delta=1.5),
    ])
    def test_bad_params(self, kw):
        base = dict(N=1e6, D_t=1e6, D_e=1e4, m=4, T=5, delta=0.1)
        base.update(kw)
        with pytest.raises(ValueError):
            CostParams(**base)

    def test_unknown_method(self):
        with pytest.raises(ValueError, match="unknown method"):
            total_flops("doremi", HAND)
        with pytest.raises(ValueError, match="unknown method"):
            relative_overhead("doremi", HAND)
