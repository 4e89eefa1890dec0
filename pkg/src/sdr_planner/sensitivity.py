"""Trade-off derivatives, pedestrian-congestion speed adjustment, and sweeps.

The closed-form average cost makes the main operating trade-offs analytic:
its slope in demand shows the economies of scale (the slope at demand C is
``(C'/C)^(3/2)`` times the slope at C'), and its slope in charge rate decays
as ``1/mu^2`` (diminishing returns on faster chargers). Both derivatives are
cross-checkable against central finite differences.

``sweep`` evaluates the full plan over a parameter grid for tabulated or
plotted reports. Grid points are independent; the output table is ordered by
grid index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .ca_model import tour_length_factor
from .errors import NotApplicableError, ValidationError
from .fleet_plan import ChargingPolicy, PlanResult, Scenario, average_cost, plan, plan_binding_is_range


class SweepParameter(str, Enum):
    ORDERS_C = "orders_C"
    DEMAND_SHARE = "demand_share"
    INTERVAL_T = "interval_t"
    PICKUP_TIME = "pickup_time"
    DROPOFF_TIME = "dropoff_time"
    CHARGE_RATE = "charge_rate"
    SPEED = "speed"
    ENERGY_PRICE = "energy_price"
    MAINTENANCE_RATE = "maintenance_rate"
    ROBOT_PRICE = "robot_price"


#: Default speed multipliers per pedestrian level of service. A is free flow;
#: D halves the robot speed; B and C are linear interpolations (assumption,
#: overridable by constructing LosLevel directly).
LOS_SPEED_MULTIPLIERS = {"A": 1.0, "B": 5.0 / 6.0, "C": 2.0 / 3.0, "D": 0.5}


@dataclass(frozen=True)
class LosLevel:
    """Sidewalk crowding class and the speed fraction robots retain on it."""

    level: str
    speed_multiplier: float

    def __post_init__(self) -> None:
        if self.level not in LOS_SPEED_MULTIPLIERS:
            raise ValidationError(f"los.level: must be one of A-D, got {self.level!r}")
        if not (0 < self.speed_multiplier <= 1):
            raise ValidationError("los.speed_multiplier: must be in (0, 1]")

    @classmethod
    def standard(cls, level: str) -> "LosLevel":
        return cls(level, LOS_SPEED_MULTIPLIERS[level])


def apply_los(s: Scenario, los: LosLevel) -> Scenario:
    """Scenario with the robot speed scaled down for the given crowding level."""
    robot = replace(s.robot, speed=s.robot.speed * los.speed_multiplier)
    return replace(s, robot=robot)


def avg_cost_demand_slope(s: Scenario) -> float:
    """d(average cost)/d(orders): always negative (economies of scale).

    Differentiates the closed-form per-order cost in the order count; the
    depot-overhead term contributes ``-overhead/C^2`` when present. Defined
    for time-bound scenarios with positive demand.
    """
    if s.orders <= 0:
        raise ValidationError("demand slope: undefined for orders <= 0")
    if plan_binding_is_range(s):
        raise NotApplicableError("demand slope: closed form needs the time constraint binding")
    robot, fixed = s.robot, s.robot.fixed_cost
    bracket = (fixed / s.interval) * (s.rho / robot.speed)
    if s.charging_policy is ChargingPolicy.IN_INTERVAL:
        bracket += (fixed / s.interval) * (s.phi * s.rho * robot.consumption / robot.charge_rate)
    bracket += s.maintenance_rate + robot.consumption * s.energy_price
    factor = tour_length_factor(s.convention, s.c2)
    slope = -(factor / 2.0) * s.region.k * math.sqrt(s.region.area) * s.orders ** -1.5 * bracket
    return slope - s.depot_overhead / s.orders**2


def avg_cost_charge_rate_slope(s: Scenario) -> float:
    """d(average cost)/d(charge rate): negative, decaying as ``1/mu^2``.

    Only meaningful when charging happens inside the service interval.
    """
    if s.orders <= 0:
        raise ValidationError("charge-rate slope: undefined for orders <= 0")
    if s.charging_policy is not ChargingPolicy.IN_INTERVAL:
        raise NotApplicableError(
            "charge-rate slope: not applicable under external charging"
        )
    if plan_binding_is_range(s):
        raise NotApplicableError("charge-rate slope: closed form needs the time constraint binding")
    robot, fixed = s.robot, s.robot.fixed_cost
    factor = tour_length_factor(s.convention, s.c2)
    return (
        -factor
        * s.region.k
        * math.sqrt(s.region.area / s.orders)
        * (fixed / s.interval)
        * s.phi
        * s.rho
        * robot.consumption
        / robot.charge_rate**2
    )


def substitute(s: Scenario, parameter: SweepParameter, value: float) -> Scenario:
    """Baseline scenario with one parameter replaced.

    Demand substitutions detach any fixed arrival rate; interval substitutions
    rescale demand through it instead (``orders = arrival_rate * interval``)
    when one is set.
    """
    parameter = SweepParameter(parameter)
    if parameter is SweepParameter.ORDERS_C:
        return replace(s, orders=value, arrival_rate=None)
    if parameter is SweepParameter.DEMAND_SHARE:
        if s.daily_orders is None:
            raise ValidationError("demand_share sweep: scenario needs daily_orders")
        return replace(s, orders=s.daily_orders * value, arrival_rate=None)
    if parameter is SweepParameter.INTERVAL_T:
        if s.arrival_rate is not None:
            return replace(s, interval=value, orders=s.arrival_rate * value)
        return replace(s, interval=value)
    if parameter is SweepParameter.PICKUP_TIME:
        return replace(s, pickup_time=value)
    if parameter is SweepParameter.DROPOFF_TIME:
        return replace(s, dropoff_time=value)
    if parameter is SweepParameter.CHARGE_RATE:
        return replace(s, robot=replace(s.robot, charge_rate=value))
    if parameter is SweepParameter.SPEED:
        return replace(s, robot=replace(s.robot, speed=value))
    if parameter is SweepParameter.ENERGY_PRICE:
        return replace(s, energy_price=value)
    if parameter is SweepParameter.MAINTENANCE_RATE:
        return replace(s, maintenance_rate=value)
    if parameter is SweepParameter.ROBOT_PRICE:
        if s.robot.lifespan_days is None:
            raise ValidationError("robot_price sweep: robot needs lifespan_days")
        robot = replace(s.robot, price=value, fixed_cost=value / s.robot.lifespan_days)
        return replace(s, robot=robot)
    raise ValidationError(f"sweep parameter: unknown {parameter!r}")


@dataclass(frozen=True)
class SweepSpec:
    parameter: SweepParameter
    start: float
    stop: float
    steps: int
    baseline: Scenario

    def __post_init__(self) -> None:
        object.__setattr__(self, "parameter", SweepParameter(self.parameter))
        if not (self.start < self.stop):
            raise ValidationError(f"sweep: from must be < to, got [{self.start}, {self.stop}]")
        if self.steps < 2:
            raise ValidationError(f"sweep.steps: must be >= 2, got {self.steps}")

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class SweepTable:
    """Plan results over a grid, with per-column monotonicity annotations."""

    parameter: SweepParameter
    values: tuple[float, ...]
    results: tuple[PlanResult, ...]
    monotonicity: dict[str, str]

    def column(self, name: str) -> tuple[float, ...]:
        return tuple(getattr(r, name) for r in self.results)


_ANNOTATED_COLUMNS = ("fleet_size", "tour_length", "avg_route_length", "total_cost", "average_cost")


def _classify(series: tuple[float, ...]) -> str:
    diffs = [b - a for a, b in zip(series, series[1:])]
    if all(d > 0 for d in diffs):
        return "increasing"
    if all(d < 0 for d in diffs):
        return "decreasing"
    if all(d == 0 for d in diffs):
        return "constant"
    return "non-monotonic"


def sweep(spec: SweepSpec) -> SweepTable:
    """Evaluate the plan at every grid point of ``spec``.

    A grid point that produces an invalid scenario fails the whole sweep with
    an error naming the point.
    """
    values: list[float] = []
    results: list[PlanResult] = []
    for i, raw in enumerate(spec.grid()):
        value = float(raw)
        try:
            scenario = substitute(spec.baseline, spec.parameter, value)
            result = plan(scenario)
        except ValidationError as exc:
            raise ValidationError(
                f"sweep grid point {i} ({spec.parameter.value}={value}): {exc}"
            ) from exc
        values.append(value)
        results.append(result)
    table = SweepTable(
        parameter=spec.parameter,
        values=tuple(values),
        results=tuple(results),
        monotonicity={},
    )
    annotations = {name: _classify(table.column(name)) for name in _ANNOTATED_COLUMNS}
    return replace(table, monotonicity=annotations)


#: Default relative step for central differences. 1e-3 would push the
#: truncation error of the 1/mu charging term to ~1e-6, right at the gate,
#: so the default sits two decades lower.
FD_RELATIVE_STEP = 1e-4

#: Relative residual above which the analytic derivative fails the check.
FD_TOLERANCE = 1e-6


@dataclass(frozen=True)
class FiniteDifferenceReport:
    parameter: SweepParameter
    analytic: float
    numeric: float
    residual: float
    step: float
    passed: bool


def finite_difference_check(
    s: Scenario,
    parameter: SweepParameter,
    h: float | None = None,
) -> FiniteDifferenceReport:
    """Cross-check an analytic derivative against a central difference.

    Supports the demand and charge-rate slopes. The check passes when the
    relative residual stays below ``FD_TOLERANCE``; the report carries both
    values either way.
    """
    parameter = SweepParameter(parameter)
    if parameter is SweepParameter.ORDERS_C:
        base = s.orders
        analytic = avg_cost_demand_slope(s)
    elif parameter is SweepParameter.CHARGE_RATE:
        base = s.robot.charge_rate
        analytic = avg_cost_charge_rate_slope(s)
    else:
        raise ValidationError(
            f"finite difference check: unsupported parameter {parameter.value!r}"
        )
    step = FD_RELATIVE_STEP * abs(base) if h is None else h
    hi = average_cost(substitute(s, parameter, base + step))
    lo = average_cost(substitute(s, parameter, base - step))
    numeric = (hi - lo) / (2 * step)
    residual = abs(analytic - numeric) / abs(analytic)
    return FiniteDifferenceReport(
        parameter=parameter,
        analytic=analytic,
        numeric=numeric,
        residual=residual,
        step=step,
        passed=residual < FD_TOLERANCE,
    )
