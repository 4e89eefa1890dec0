from __future__ import annotations

import math
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from sdr_planner import (
    Binding,
    ChargingPolicy,
    LengthConvention,
    Metric,
    Region,
    RobotSpec,
    Scenario,
    ValidationError,
    average_cost,
    avg_route_length,
    kkt_verify,
    optimal_fleet_size,
    plan,
)
from sdr_planner.ca_model import tour_length_factor

from conftest import make_lunch_scenario, with_share


def scenarios(convention=None, charging=None, big_range=True):
    """Strategy over valid, mostly time-bound scenarios."""
    return st.builds(
        lambda area, k, orders, t, tp, td, v, rc, mu, rho, phi, pid, pic, fixed, conv, pol: Scenario(
            region=Region(area=area, metric=Metric.CUSTOM, k=k),
            robot=RobotSpec(
                fixed_cost=fixed,
                speed=v,
                consumption=rc,
                charge_rate=mu,
                range=1e6 if big_range else 1.0,
            ),
            orders=orders,
            interval=t,
            pickup_time=tp,
            dropoff_time=td,
            maintenance_rate=pid,
            energy_price=pic,
            rho=rho,
            phi=phi,
            convention=convention or conv,
            charging_policy=charging or pol,
        ),
        area=st.floats(0.05, 50),
        k=st.floats(0.3, 1.5),
        orders=st.floats(1, 5000),
        t=st.floats(0.5, 8),
        tp=st.floats(0, 0.2),
        td=st.floats(0, 0.2),
        v=st.floats(1, 12),
        rc=st.floats(5, 60),
        mu=st.floats(100, 3000),
        rho=st.floats(1, 1.5),
        phi=st.floats(1, 1.5),
        pid=st.floats(0, 0.5),
        pic=st.floats(0, 1e-3),
        fixed=st.floats(0.5, 50),
        conv=st.sampled_from(list(LengthConvention)),
        pol=st.sampled_from(list(ChargingPolicy)),
    )


class TestRobotSpec:
    def test_range_derived_from_battery(self):
        robot = RobotSpec(fixed_cost=1.0, speed=4, consumption=28.7, charge_rate=400,
                          battery_capacity=200)
        assert robot.range == pytest.approx(6.97, abs=0.01)

    def test_range_battery_consistency_enforced(self):
        with pytest.raises(ValidationError, match="robot.range"):
            RobotSpec(fixed_cost=1.0, speed=4, consumption=28.7, charge_rate=400,
                      range=10.0, battery_capacity=200)

    def test_consistent_range_and_battery_accepted(self):
        robot = RobotSpec(fixed_cost=1.0, speed=4, consumption=28.7, charge_rate=400,
                          range=6.97, battery_capacity=200)
        assert robot.range == 6.97

    def test_from_price_amortization(self):
        robot = RobotSpec.from_price(5000, 730, speed=4, consumption=28.7,
                                     charge_rate=400, battery_capacity=200)
        assert robot.fixed_cost == pytest.approx(6.85, abs=0.005)

    @pytest.mark.parametrize("field,value", [
        ("speed", 0), ("speed", -1), ("consumption", 0), ("charge_rate", 0),
    ])
    def test_positive_fields(self, field, value):
        kwargs = dict(fixed_cost=1.0, speed=4, consumption=28.7, charge_rate=400, range=7.0)
        kwargs[field] = value
        with pytest.raises(ValidationError):
            RobotSpec(**kwargs)


class TestScenarioValidation:
    def test_arrival_rate_consistency(self, lunch):
        ok = replace(lunch, arrival_rate=lunch.orders / lunch.interval)
        assert ok.arrival_rate is not None
        with pytest.raises(ValidationError, match="arrival_rate"):
            replace(lunch, arrival_rate=1.0)

    @pytest.mark.parametrize("field,value", [
        ("orders", -1), ("interval", 0), ("pickup_time", -0.1),
        ("dropoff_time", -0.1), ("rho", 0.9), ("phi", 0.5),
        ("maintenance_rate", -1), ("energy_price", -1), ("depot_overhead", -1),
    ])
    def test_field_bounds(self, lunch, field, value):
        with pytest.raises(ValidationError):
            replace(lunch, **{field: value})


class TestOptimalFleetSize:
    def test_lunch_interval(self, lunch):
        assert optimal_fleet_size(lunch) == pytest.approx(18.41, abs=0.2)

    def test_soho_depot(self, lunch_eq9):
        soho = replace(lunch_eq9, region=Region(area=0.46, metric=Metric.MANHATTAN),
                       orders=74, daily_orders=None)
        assert optimal_fleet_size(soho) == pytest.approx(5.01, abs=0.05)

    def test_no_orders_no_robots(self, lunch):
        assert optimal_fleet_size(replace(lunch, orders=0.0)) == 0.0

    def test_matches_time_constraint_at_equality(self, lunch):
        # Per-robot busy time at the optimum fills the interval exactly.
        f = optimal_fleet_size(lunch)
        tour = lunch.tour_length()
        per_robot = (
            lunch.rho * tour / lunch.robot.speed
            + lunch.orders * lunch.service_time
            + lunch.phi * lunch.rho * tour * lunch.robot.consumption / lunch.robot.charge_rate
        ) / f
        assert per_robot == pytest.approx(lunch.interval, rel=1e-12)


class TestPlan:
    def test_lunch_interval_results(self, lunch):
        result = plan(lunch)
        assert result.fleet_size == pytest.approx(18.41, abs=0.2)
        assert result.total_cost == pytest.approx(128.08, rel=0.02)
        assert result.average_cost == pytest.approx(0.45, abs=0.01)
        assert result.avg_route_length == pytest.approx(1.68, abs=0.05)
        assert result.binding is Binding.TIME
        assert result.feasible

    def test_range_check_of_case_study(self, lunch):
        result = plan(lunch)
        buffered = lunch.rho * result.avg_route_length
        assert buffered == pytest.approx(2.1, abs=0.1)
        assert buffered <= lunch.robot.range

    def test_greenwich_village_depot(self, lunch_eq9):
        gv = replace(lunch_eq9, region=Region(area=0.38, metric=Metric.MANHATTAN),
                     orders=99, daily_orders=None)
        result = plan(gv)
        assert result.fleet_size == pytest.approx(6.15, abs=0.05)
        assert result.total_cost == pytest.approx(42.77, rel=0.02)

    def test_total_cost_identity(self, lunch):
        result = plan(lunch)
        robot = lunch.robot
        expected = (robot.fixed_cost * result.fleet_size
                    + result.tour_length * lunch.maintenance_rate
                    + result.tour_length * robot.consumption * lunch.energy_price
                    + lunch.depot_overhead)
        assert result.total_cost == pytest.approx(expected, rel=1e-12)

    def test_zero_orders(self, lunch):
        result = plan(replace(lunch, orders=0.0))
        assert result.fleet_size == 0.0
        assert result.tour_length == 0.0
        assert result.total_cost == 0.0
        assert math.isnan(result.average_cost)
        assert result.avg_route_length == 0.0

    def test_fleet_cap_drives_feasibility(self, lunch):
        assert plan(replace(lunch, fleet_cap=10.0)).feasible is False
        assert plan(replace(lunch, fleet_cap=25.0)).feasible is True

    def test_depot_overhead_added_after_optimization(self, lunch):
        base = plan(lunch)
        rented = plan(replace(lunch, depot_overhead=273.97))
        assert rented.fleet_size == base.fleet_size
        assert rented.total_cost == pytest.approx(base.total_cost + 273.97, rel=1e-12)

    @given(s=scenarios())
    @settings(max_examples=60, deadline=None)
    def test_closed_form_total_matches_objective(self, s):
        # Expand the substituted closed form from scratch; it must agree with
        # the plan's objective-at-optimum total.
        result = plan(s)
        robot = s.robot
        tour = s.tour_length()
        busy = s.rho * tour / robot.speed + s.orders * s.service_time
        if s.charging_policy is ChargingPolicy.IN_INTERVAL:
            busy += s.phi * s.rho * tour * robot.consumption / robot.charge_rate
        closed_form = (robot.fixed_cost / s.interval) * busy \
            + tour * (s.maintenance_rate + robot.consumption * s.energy_price)
        assert result.total_cost == pytest.approx(closed_form, rel=1e-9)


class TestAverageCost:
    def test_matches_plan_exactly(self, lunch):
        for s in (lunch, replace(lunch, convention=LengthConvention.EQ9),
                  replace(lunch, charging_policy=ChargingPolicy.EXTERNAL),
                  replace(lunch, depot_overhead=273.97)):
            assert average_cost(s) == pytest.approx(plan(s).average_cost, rel=1e-12)

    def test_fifteen_percent_share(self, lunch):
        assert average_cost(with_share(lunch, 0.15)) == pytest.approx(0.38, abs=0.01)

    def test_two_minute_pickup(self, lunch):
        fast = replace(lunch, pickup_time=2 / 60)
        assert average_cost(fast) == pytest.approx(0.39, abs=0.01)

    def test_external_charging_saving(self, lunch):
        base = average_cost(lunch)
        ext = average_cost(replace(lunch, charging_policy=ChargingPolicy.EXTERNAL))
        assert 100 * (base - ext) / base == pytest.approx(8.90, abs=0.3)

    def test_zero_orders_rejected(self, lunch):
        with pytest.raises(ValidationError, match="average cost"):
            average_cost(replace(lunch, orders=0.0))

    @given(s=scenarios())
    @settings(max_examples=60, deadline=None)
    def test_closed_form_identity(self, s):
        assert average_cost(s) == pytest.approx(plan(s).average_cost, rel=1e-12)

    @given(s=scenarios(), ratio=st.floats(1.01, 50))
    @settings(max_examples=60, deadline=None)
    def test_economies_of_scale(self, s, ratio):
        assert average_cost(replace(s, orders=s.orders * ratio)) < average_cost(s)

    @given(s=scenarios(charging=ChargingPolicy.IN_INTERVAL))
    @settings(max_examples=60, deadline=None)
    def test_external_charging_never_costs_more(self, s):
        external = replace(s, charging_policy=ChargingPolicy.EXTERNAL)
        assert average_cost(external) < average_cost(s)

    @given(s=scenarios(), extra=st.floats(0.001, 0.2))
    @settings(max_examples=60, deadline=None)
    def test_affine_in_service_time_with_slope_p_over_t(self, s, extra):
        slower = replace(s, pickup_time=s.pickup_time + extra)
        delta = average_cost(slower) - average_cost(s)
        assert delta == pytest.approx(s.robot.fixed_cost / s.interval * extra, rel=1e-9)


class TestAvgRouteLength:
    def test_lunch_interval(self, lunch):
        assert avg_route_length(lunch) == pytest.approx(1.68, abs=0.05)

    def test_matches_plan(self, lunch):
        assert avg_route_length(lunch) == pytest.approx(plan(lunch).avg_route_length, rel=1e-12)

    def test_doubled_convention_closed_form(self, lunch_eq9):
        # Direct evaluation of the per-robot route closed form.
        s = lunch_eq9
        factor = tour_length_factor(s.convention, s.c2)
        denom = (s.rho / s.robot.speed
                 + math.sqrt(s.orders) * s.service_time / (factor * s.region.k * math.sqrt(s.region.area))
                 + s.phi * s.rho * s.robot.consumption / s.robot.charge_rate)
        assert avg_route_length(s) == pytest.approx(s.interval / denom, rel=1e-12)
        assert avg_route_length(s) == pytest.approx(plan(s).avg_route_length, rel=1e-12)

    def test_decreasing_in_demand(self, lunch):
        assert avg_route_length(replace(lunch, orders=2 * lunch.orders)) < avg_route_length(lunch)

    def test_zero_orders_rejected(self, lunch):
        with pytest.raises(ValidationError):
            avg_route_length(replace(lunch, orders=0.0))

    @given(s=scenarios(), ratio=st.floats(1.01, 20))
    @settings(max_examples=40, deadline=None)
    def test_decreasing_in_orders(self, s, ratio):
        # Strict only when stops take non-negligible time: with zero service
        # time the per-robot route is demand-independent.
        longer = avg_route_length(s)
        shorter = avg_route_length(replace(s, orders=s.orders * ratio))
        assert shorter <= longer
        if s.service_time > 1e-9:
            assert shorter < longer


class TestKktCertificate:
    def test_time_binding_multipliers(self, lunch):
        result = plan(lunch)
        assert result.lambda1 == pytest.approx(6.85, abs=0.005)
        assert result.lambda2 == 0.0
        certificate = kkt_verify(lunch, result)
        assert certificate.passed
        assert certificate.stationarity_residual < 1e-9
        assert certificate.cs_time_residual < 1e-9
        assert certificate.cs_range_residual < 1e-9

    def test_range_binding_when_range_is_tiny(self, lunch):
        crippled = replace(lunch, robot=replace(lunch.robot, range=0.01, battery_capacity=None))
        result = plan(crippled)
        assert result.binding is Binding.RANGE
        assert result.lambda2 == pytest.approx(crippled.robot.fixed_cost)
        assert result.lambda1 == 0.0
        assert result.fleet_size == pytest.approx(
            crippled.rho * result.tour_length / 0.01, rel=1e-12
        )
        certificate = kkt_verify(crippled, result)
        assert certificate.passed

    def test_tampered_fleet_fails_primal(self, lunch):
        result = plan(lunch)
        tampered = replace(result, fleet_size=result.fleet_size / 2)
        certificate = kkt_verify(lunch, tampered)
        assert not certificate.passed
        assert "primal_time" in certificate.violations

    def test_tampered_multipliers_fail_stationarity(self, lunch):
        result = plan(lunch)
        tampered = replace(result, lambda1=0.0)
        certificate = kkt_verify(lunch, tampered)
        assert not certificate.passed
        assert "stationarity" in certificate.violations

    @given(s=scenarios())
    @settings(max_examples=60, deadline=None)
    def test_every_plan_certifies(self, s):
        certificate = kkt_verify(s, plan(s))
        assert certificate.passed, certificate.violations


def test_make_lunch_scenario_matches_fixture_file():
    from sdr_planner import load_scenario
    from conftest import FIXTURES

    assert make_lunch_scenario() == load_scenario(FIXTURES / "manhattan_lunch.json")
