"""Published-number checks over the bundled case-study fixtures.

The bundled Manhattan lunch-interval scenario and the three-neighborhood
partition come with externally published results (fleet sizes, costs,
savings percentages). ``run_checks`` recomputes each one and reports
pass/fail at the documented tolerance. The source figures split between the
two tour-length conventions, so each check pins its own; the fixture groups
are labeled accordingly.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from pathlib import Path

from .ca_model import LengthConvention, short_circuit_factor_limit
from .fleet_plan import ChargingPolicy, Scenario, average_cost, plan
from .scenario_io import compare_depots, load_partition, load_scenario
from .sensitivity import LosLevel, apply_los, avg_cost_demand_slope

#: Environment variable overriding the bundled fixture directory.
FIXTURES_ENV = "SDR_PLANNER_FIXTURES"


def fixtures_dir() -> Path:
    override = os.environ.get(FIXTURES_ENV)
    if override:
        return Path(override)
    return Path(__file__).parent / "fixtures"


@dataclass(frozen=True)
class CheckResult:
    name: str
    actual: float
    expected: str
    passed: bool


def _approx(name: str, actual: float, expected: float, *, abs_tol: float | None = None,
            rel_tol: float | None = None) -> CheckResult:
    if abs_tol is not None:
        ok = abs(actual - expected) <= abs_tol
        target = f"{expected:g} +/- {abs_tol:g}"
    else:
        ok = abs(actual - expected) <= rel_tol * abs(expected)
        target = f"{expected:g} +/- {rel_tol:.0%}"
    return CheckResult(name=name, actual=actual, expected=target, passed=ok)


def _bound(name: str, actual: float, upper: float) -> CheckResult:
    return CheckResult(name=name, actual=actual, expected=f"<= {upper:g}", passed=actual <= upper)


def _with_share(base: Scenario, share: float) -> Scenario:
    return replace(base, orders=base.daily_orders * share, arrival_rate=None)


def run_checks(fixtures: Path | None = None) -> list[CheckResult]:
    """Recompute every bundled-fixture result and compare to its target."""
    root = fixtures or fixtures_dir()
    base = load_scenario(root / "manhattan_lunch.json")  # single_leg, 5% share

    checks: list[CheckResult] = []

    # Single-depot lunch interval, single-leg convention.
    result = plan(base)
    checks.append(_approx("single_depot.fleet_size", result.fleet_size, 18.41, abs_tol=0.2))
    checks.append(_approx("single_depot.total_cost", result.total_cost, 128.08, rel_tol=0.02))
    checks.append(_approx("single_depot.average_cost", result.average_cost, 0.45, abs_tol=0.01))
    checks.append(_approx("single_depot.route_length", result.avg_route_length, 1.68, abs_tol=0.05))
    buffered = base.rho * result.avg_route_length
    checks.append(_approx("single_depot.buffered_route", buffered, 2.1, abs_tol=0.1))
    checks.append(_bound("single_depot.range_covers_route", buffered, base.robot.range))

    # Three-neighborhood partition, doubled-factor (eq9) convention.
    eq9_base = replace(base, convention=LengthConvention.EQ9)
    partition = load_partition(root / "table1.json", like=base.region)
    rows = compare_depots(partition, eq9_base)
    expected_rows = {
        "SoHo-Little Italy-Hudson Square": (5.01, 34.93),
        "Greenwich Village": (6.15, 42.77),
        "West Village": (7.17, 49.86),
        "Sum": (18.33, 127.56),
    }
    for row in rows:
        fleet, cost = expected_rows[row.name]
        label = row.name.split("-")[0].strip().lower().replace(" ", "_")
        checks.append(_approx(f"three_depots.{label}.fleet", row.fleet, fleet, abs_tol=0.05))
        checks.append(_approx(f"three_depots.{label}.cost", row.total_cost, cost, rel_tol=0.02))

    # Demand and pickup-time sensitivity, single-leg convention.
    ac_5 = result.average_cost
    ac_15 = average_cost(_with_share(base, 0.15))
    checks.append(_approx("demand.avg_cost_15pct", ac_15, 0.38, abs_tol=0.01))
    fast_pickup = replace(base, pickup_time=2 / 60)
    ac_5_fast = average_cost(fast_pickup)
    ac_15_fast = average_cost(_with_share(fast_pickup, 0.15))
    checks.append(_approx("pickup.avg_cost_5pct_2min", ac_5_fast, 0.39, abs_tol=0.01))
    checks.append(_approx("pickup.avg_cost_15pct_2min", ac_15_fast, 0.32, abs_tol=0.01))
    checks.append(
        _approx("pickup.saving_5pct", 100 * (ac_5 - ac_5_fast) / ac_5, 12.74, abs_tol=0.3)
    )
    checks.append(
        _approx("pickup.saving_15pct", 100 * (ac_15 - ac_15_fast) / ac_15, 15.05, abs_tol=0.3)
    )

    # Charging-rate and external-charging savings.
    fast_charge = replace(base, robot=replace(base.robot, charge_rate=2000.0))
    saving_5 = 100 * (ac_5 - average_cost(fast_charge)) / ac_5
    saving_15 = 100 * (ac_15 - average_cost(_with_share(fast_charge, 0.15))) / ac_15
    checks.append(_approx("charging.saving_2kw_5pct", saving_5, 7.11, abs_tol=0.3))
    checks.append(_approx("charging.saving_2kw_15pct", saving_15, 4.85, abs_tol=0.3))
    external = replace(base, charging_policy=ChargingPolicy.EXTERNAL)
    ext_5 = 100 * (ac_5 - average_cost(external)) / ac_5
    ext_15 = 100 * (ac_15 - average_cost(_with_share(external, 0.15))) / ac_15
    checks.append(_approx("charging.saving_external_5pct", ext_5, 8.90, abs_tol=0.3))
    checks.append(_approx("charging.saving_external_15pct", ext_15, 6.07, abs_tol=0.3))

    # Crowded-sidewalk speed loss.
    los_d = LosLevel.standard("D")
    slow_5 = 100 * (average_cost(apply_los(base, los_d)) - ac_5) / ac_5
    slow_base_15 = _with_share(base, 0.15)
    slow_15 = 100 * (average_cost(apply_los(slow_base_15, los_d)) - ac_15) / ac_15
    checks.append(_approx("los.cost_increase_d_5pct", slow_5, 25.84, abs_tol=0.5))
    checks.append(_approx("los.cost_increase_d_15pct", slow_15, 17.62, abs_tol=0.5))

    # Depot rent spread over the interval's orders.
    rent = replace(base, depot_overhead=273.97)
    checks.append(_approx("rent.avg_cost_5pct", average_cost(rent), 1.41, abs_tol=0.02))
    checks.append(
        _approx("rent.avg_cost_15pct", average_cost(_with_share(rent, 0.15)), 0.70, abs_tol=0.02)
    )

    # Economies-of-scale slope ratios (convention-independent).
    slope = lambda c: avg_cost_demand_slope(replace(base, orders=c, arrival_rate=None))
    checks.append(_approx("slope.ratio_100_vs_200", slope(100) / slope(200), 2.83, abs_tol=0.01))
    checks.append(_approx("slope.ratio_100_vs_1000", slope(100) / slope(1000), 31.62, abs_tol=0.05))

    # Short-circuit factor limit and its doubled form.
    limit = short_circuit_factor_limit()
    checks.append(_approx("constants.sc_factor_limit", limit, 0.8113067, abs_tol=1e-5))
    checks.append(_approx("constants.sc_factor_doubled", 2 * limit, 1.62262, abs_tol=1e-5))

    return checks


def format_table(checks: list[CheckResult]) -> str:
    """Fixed-width pass/fail table."""
    width = max(len(c.name) for c in checks)
    lines = []
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        lines.append(f"{status}  {c.name:<{width}}  actual={c.actual:.6g}  target={c.expected}")
    failed = sum(1 for c in checks if not c.passed)
    lines.append(f"{len(checks) - failed}/{len(checks)} checks passed")
    return "\n".join(lines) + "\n"
