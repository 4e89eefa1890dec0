from __future__ import annotations

from dataclasses import replace
from pathlib import Path

import pytest

from sdr_planner import (
    ChargingPolicy,
    LengthConvention,
    Metric,
    Region,
    RobotSpec,
    Scenario,
)

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "sdr_planner" / "fixtures"

DAILY_ORDERS = 5712


def make_lunch_scenario(**overrides) -> Scenario:
    """The Manhattan lunch-interval baseline (5% share, single-leg factor)."""
    robot = RobotSpec.from_price(
        price=5000.0,
        lifespan_days=730.0,
        speed=4.0,
        consumption=28.7,
        charge_rate=400.0,
        compartment=1,
        battery_capacity=200.0,
    )
    base = Scenario(
        region=Region(area=3.51, metric=Metric.MANHATTAN),
        robot=robot,
        orders=DAILY_ORDERS * 0.05,
        interval=2.0,
        pickup_time=3 / 60,
        dropoff_time=2 / 60,
        maintenance_rate=0.06,
        energy_price=0.17 / 1000,
        rho=1.25,
        phi=1.2,
        charging_policy=ChargingPolicy.IN_INTERVAL,
        convention=LengthConvention.SINGLE_LEG,
        daily_orders=DAILY_ORDERS,
    )
    return replace(base, **overrides) if overrides else base


def with_share(s: Scenario, share: float) -> Scenario:
    return replace(s, orders=s.daily_orders * share, arrival_rate=None)


@pytest.fixture
def lunch() -> Scenario:
    return make_lunch_scenario()


@pytest.fixture
def lunch_eq9() -> Scenario:
    return make_lunch_scenario(convention=LengthConvention.EQ9)
