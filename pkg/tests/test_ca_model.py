from __future__ import annotations

import math

import pytest
from hypothesis import given, strategies as st

from sdr_planner import (
    LengthConvention,
    Metric,
    Region,
    StopMix,
    ValidationError,
    integrated_tour_length,
    leg_length,
    short_circuit_factor,
    short_circuit_factor_limit,
    tour_length_factor,
)


class TestRegion:
    def test_metric_defaults(self):
        assert Region(area=1.0, metric=Metric.EUCLIDEAN).k == 0.763
        assert Region(area=1.0, metric=Metric.MANHATTAN).k == 0.97

    def test_explicit_k_overrides_default(self):
        assert Region(area=1.0, metric=Metric.MANHATTAN, k=1.1).k == 1.1

    def test_custom_metric_requires_k(self):
        with pytest.raises(ValidationError, match="region.k"):
            Region(area=1.0, metric=Metric.CUSTOM)
        assert Region(area=1.0, metric=Metric.CUSTOM, k=0.85).k == 0.85

    def test_custom_k_out_of_range(self):
        with pytest.raises(ValidationError, match="region.k"):
            Region(area=1.0, metric=Metric.CUSTOM, k=2.5)

    def test_nonpositive_area_rejected(self):
        with pytest.raises(ValidationError, match="region.area"):
            Region(area=0.0)
        with pytest.raises(ValidationError, match="region.area"):
            Region(area=-3.0)


class TestLegLength:
    def test_empty_route(self):
        assert leg_length(0, Region(area=7.0)) == 0.0

    def test_manhattan_study_leg(self):
        # 0.97 * sqrt(285.6 * 3.51), cross-checks the case-study product
        # of per-robot route times fleet size (1.68 * 18.41 ~= 30.9).
        region = Region(area=3.51, metric=Metric.MANHATTAN)
        assert leg_length(285.6, region) == pytest.approx(30.71, abs=0.01)

    def test_round_count(self):
        assert leg_length(100, Region(area=1.0, metric=Metric.EUCLIDEAN)) == pytest.approx(7.63)

    def test_negative_count_rejected(self):
        with pytest.raises(ValidationError, match="n_stops"):
            leg_length(-1, Region(area=1.0))

    @given(
        k=st.floats(0.2, 1.9),
        area=st.floats(0.01, 100),
        n=st.floats(1, 1e4),
        scale=st.floats(1.1, 5.0),
    )
    def test_scales_linearly_in_k_and_sqrt_area(self, k, area, n, scale):
        base = leg_length(n, Region(area=area, metric=Metric.CUSTOM, k=k))
        k_scaled = leg_length(n, Region(area=area, metric=Metric.CUSTOM, k=min(k * scale, 1.99)))
        assert k_scaled == pytest.approx(base * min(k * scale, 1.99) / k, rel=1e-12)
        area_scaled = leg_length(n, Region(area=area * scale**2, metric=Metric.CUSTOM, k=k))
        assert area_scaled == pytest.approx(base * scale, rel=1e-12)


class TestShortCircuitFactor:
    def test_balanced_mix_without_load_term(self):
        mix = StopMix(n_p=10, n_d=10, n_sc=0, c1=0.0)
        assert short_circuit_factor(mix) == pytest.approx(1 / math.sqrt(2), rel=1e-12)

    def test_converges_to_limit_as_sc_dominates(self):
        mix = StopMix(n_p=1, n_d=1, n_sc=1e6, c1=0.0)
        assert short_circuit_factor(mix) == pytest.approx(0.81131, abs=1e-3)

    def test_sc_only_delegates_to_limit(self):
        mix = StopMix(n_p=0, n_d=0, n_sc=500)
        assert short_circuit_factor(mix) == short_circuit_factor_limit()

    def test_missing_c1_rejected_for_mixed_stops(self):
        with pytest.raises(ValidationError, match="c1"):
            short_circuit_factor(StopMix(n_p=5, n_d=3, n_sc=2))

    def test_empty_mix_rejected(self):
        with pytest.raises(ValidationError, match="stop mix"):
            short_circuit_factor(StopMix(n_p=0, n_d=0, n_sc=0))

    def test_capacity_below_one_rejected(self):
        with pytest.raises(ValidationError, match="capacity"):
            StopMix(n_p=1, n_d=1, n_sc=0, capacity=0.5)

    @given(beta=st.floats(1e4, 1e8))
    def test_limit_convergence_band(self, beta):
        mix = StopMix(n_p=1, n_d=1, n_sc=2 * beta, c1=0.0)
        assert abs(short_circuit_factor(mix) - short_circuit_factor_limit()) < 1e-3


class TestShortCircuitFactorLimit:
    def test_reference_value(self):
        assert short_circuit_factor_limit() == pytest.approx(0.8113067, abs=1e-5)

    def test_doubled_coefficient(self):
        assert 2 * short_circuit_factor_limit() == pytest.approx(1.62262, abs=1e-5)

    def test_zero_offset_is_pure_inverse_root_two(self):
        assert short_circuit_factor_limit(c2=0.0) == pytest.approx(1 / math.sqrt(2), rel=1e-15)


class TestIntegratedTourLength:
    REGION = Region(area=3.51, metric=Metric.MANHATTAN)

    def test_doubled_convention(self):
        length = integrated_tour_length(285.6, self.REGION, LengthConvention.EQ9)
        assert length == pytest.approx(49.83, abs=0.05)

    def test_single_leg_convention(self):
        length = integrated_tour_length(285.6, self.REGION, LengthConvention.SINGLE_LEG)
        assert length == pytest.approx(30.71, abs=0.05)

    def test_zero_orders(self):
        assert integrated_tour_length(0.0, self.REGION, LengthConvention.EQ9) == 0.0

    def test_negative_orders_rejected(self):
        with pytest.raises(ValidationError, match="orders"):
            integrated_tour_length(-1.0, self.REGION, LengthConvention.EQ9)

    @given(
        c1=st.floats(1, 1e4),
        ratio=st.floats(1.0001, 100),
        area=st.floats(0.01, 50),
        convention=st.sampled_from(list(LengthConvention)),
    )
    def test_square_root_growth(self, c1, ratio, area, convention):
        region = Region(area=area, metric=Metric.EUCLIDEAN)
        c2 = c1 * ratio
        l1 = integrated_tour_length(c1, region, convention)
        l2 = integrated_tour_length(c2, region, convention)
        assert l2 > l1
        assert l2 / l1 == pytest.approx(math.sqrt(c2 / c1), rel=1e-12)

    @given(orders=st.floats(0.1, 1e5), area=st.floats(0.01, 50))
    def test_conventions_differ_by_doubled_factor(self, orders, area):
        region = Region(area=area, metric=Metric.MANHATTAN)
        doubled = integrated_tour_length(orders, region, LengthConvention.EQ9)
        single = integrated_tour_length(orders, region, LengthConvention.SINGLE_LEG)
        assert doubled == pytest.approx(2 * short_circuit_factor_limit() * single, rel=1e-12)
        assert doubled / single == pytest.approx(1.62262, abs=1e-5)

    def test_factor_values(self):
        assert tour_length_factor(LengthConvention.SINGLE_LEG) == 1.0
        assert tour_length_factor(LengthConvention.EQ9) == pytest.approx(1.62262, abs=1e-5)
