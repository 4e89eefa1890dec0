"""Single-interval fleet sizing by closed-form cost minimization.

One planning interval: ``orders`` accumulated in the previous interval must
be delivered within ``interval`` hours by a fleet of ``f`` identical robots.
Total cost is ``P*f + L*pi_d + L*r_c*pi_c`` (amortized robot cost plus
per-mile maintenance and energy), subject to two lower bounds on ``f``:

* time: driving, stop service, and (under in-interval charging) recharge
  time per robot must fit in the interval;
* range: the buffered per-robot route ``rho * L / f`` must not exceed the
  battery range.

Both constraints scale as ``1/f`` and the objective increases in ``f``, so
the optimum is the larger of the two binding points and comes with an
explicit KKT certificate (``lambda1 + lambda2 = P``, complementary
slackness, primal/dual feasibility).

All functions are pure; Scenario and result values are immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .ca_model import LengthConvention, Region, DEFAULT_C2, integrated_tour_length, tour_length_factor
from .errors import ValidationError

#: Tolerance for the battery-vs-range consistency check (relative).
RANGE_CONSISTENCY_RTOL = 0.01


class ChargingPolicy(str, Enum):
    #: Robots recharge before the interval ends; charge time competes with service.
    IN_INTERVAL = "in_interval"
    #: Depot recharges after hours; charge time leaves the fleet-size equation.
    EXTERNAL = "external"


class Binding(str, Enum):
    TIME = "time_binding"
    RANGE = "range_binding"
    BOTH = "both"


@dataclass(frozen=True)
class RobotSpec:
    """Robot hardware and cost parameters.

    ``fixed_cost`` is the amortized per-interval capital cost (straight-line:
    purchase price / lifespan in days, one interval per day). ``range`` in
    miles may be given directly or derived as ``battery_capacity /
    consumption``; when both are given they must agree within 1%.
    """

    fixed_cost: float  # $ per interval
    speed: float  # miles/hour
    consumption: float  # Wh/mile
    charge_rate: float  # W
    compartment: int = 1  # orders
    range: float | None = None  # miles
    battery_capacity: float | None = None  # Wh
    price: float | None = None  # $
    lifespan_days: float | None = None

    def __post_init__(self) -> None:
        if self.fixed_cost < 0:
            raise ValidationError(f"robot.fixed_cost: must be >= 0, got {self.fixed_cost}")
        if not (self.speed > 0):
            raise ValidationError(f"robot.speed: must be > 0, got {self.speed}")
        if not (self.consumption > 0):
            raise ValidationError(f"robot.consumption: must be > 0, got {self.consumption}")
        if not (self.charge_rate > 0):
            raise ValidationError(f"robot.charge_rate: must be > 0, got {self.charge_rate}")
        if self.compartment < 1:
            raise ValidationError(f"robot.compartment: must be >= 1, got {self.compartment}")
        if self.range is None:
            if self.battery_capacity is None:
                raise ValidationError("robot.range: give range or battery_capacity")
            object.__setattr__(self, "range", self.battery_capacity / self.consumption)
        else:
            if not (self.range > 0):
                raise ValidationError(f"robot.range: must be > 0, got {self.range}")
            if self.battery_capacity is not None:
                implied = self.battery_capacity / self.consumption
                if abs(implied - self.range) > RANGE_CONSISTENCY_RTOL * self.range:
                    raise ValidationError(
                        f"robot.range: {self.range} mi inconsistent with "
                        f"battery_capacity/consumption = {implied:.4f} mi (>1% apart)"
                    )

    @classmethod
    def from_price(
        cls,
        price: float,
        lifespan_days: float,
        *,
        speed: float,
        consumption: float,
        charge_rate: float,
        compartment: int = 1,
        range: float | None = None,
        battery_capacity: float | None = None,
    ) -> "RobotSpec":
        """Build a spec with straight-line amortization of the purchase price."""
        if not (lifespan_days > 0):
            raise ValidationError(f"robot.lifespan_days: must be > 0, got {lifespan_days}")
        return cls(
            fixed_cost=price / lifespan_days,
            speed=speed,
            consumption=consumption,
            charge_rate=charge_rate,
            compartment=compartment,
            range=range,
            battery_capacity=battery_capacity,
            price=price,
            lifespan_days=lifespan_days,
        )


@dataclass(frozen=True)
class Scenario:
    """One planning interval: demand, service times, buffers, and cost rates.

    Times are hours, distances miles, energy watt-hours; ``energy_price`` is
    dollars per watt-hour (config layers accept $/kWh and divide by 1000).
    ``rho >= 1`` buffers routes longer than the modeled average; ``phi >= 1``
    covers the charging slowdown near full battery. ``arrival_rate`` (orders
    per hour), when given, must satisfy ``orders = arrival_rate * interval``.
    ``daily_orders`` is the demand base used by demand-share sweeps.
    """

    region: Region
    robot: RobotSpec
    orders: float  # per interval
    interval: float  # hours
    pickup_time: float  # hours per stop
    dropoff_time: float  # hours per stop
    maintenance_rate: float  # $ per mile
    energy_price: float  # $ per Wh
    rho: float = 1.25
    phi: float = 1.2
    charging_policy: ChargingPolicy = ChargingPolicy.IN_INTERVAL
    convention: LengthConvention = LengthConvention.EQ9
    depot_overhead: float = 0.0  # $ per interval
    arrival_rate: float | None = None  # orders/hour
    daily_orders: float | None = None
    c2: float = DEFAULT_C2
    fleet_cap: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "charging_policy", ChargingPolicy(self.charging_policy))
        object.__setattr__(self, "convention", LengthConvention(self.convention))
        if self.orders < 0:
            raise ValidationError(f"demand.orders: must be >= 0, got {self.orders}")
        if not (self.interval > 0):
            raise ValidationError(f"interval.hours: must be > 0, got {self.interval}")
        if self.pickup_time < 0 or self.dropoff_time < 0:
            raise ValidationError("service times: must be >= 0")
        if self.rho < 1:
            raise ValidationError(f"buffers.rho: must be >= 1, got {self.rho}")
        if self.phi < 1:
            raise ValidationError(f"buffers.phi: must be >= 1, got {self.phi}")
        if self.maintenance_rate < 0:
            raise ValidationError("costs.maintenance_rate: must be >= 0")
        if self.energy_price < 0:
            raise ValidationError("costs.energy_price: must be >= 0")
        if self.depot_overhead < 0:
            raise ValidationError("costs.depot_overhead: must be >= 0")
        if self.arrival_rate is not None:
            expected = self.arrival_rate * self.interval
            if not math.isclose(expected, self.orders, rel_tol=1e-9, abs_tol=1e-9):
                raise ValidationError(
                    f"demand: orders={self.orders} inconsistent with "
                    f"arrival_rate*interval={expected}"
                )
        if self.fleet_cap is not None and self.fleet_cap < 0:
            raise ValidationError("fleet_cap: must be >= 0")

    @property
    def service_time(self) -> float:
        """Combined pickup plus drop-off service time per order, hours."""
        return self.pickup_time + self.dropoff_time

    def tour_length(self) -> float:
        """Expected integrated tour length for the interval's orders, miles."""
        return integrated_tour_length(self.orders, self.region, self.convention, self.c2)


@dataclass(frozen=True)
class PlanResult:
    """Optimal fleet size, costs, and the multipliers certifying optimality."""

    fleet_size: float
    fleet_size_ceil: int
    tour_length: float  # miles
    avg_route_length: float  # miles per robot
    total_cost: float  # $ per interval
    average_cost: float  # $ per order (nan when orders == 0)
    lambda1: float  # $ on the time constraint
    lambda2: float  # $ on the range constraint
    binding: Binding
    feasible: bool


@dataclass(frozen=True)
class KktCertificate:
    """Residuals of the first-order optimality conditions for a plan.

    Slacks are in through-multiplied form (time budget in robot-hours,
    range budget in robot-miles) so a zero fleet stays well defined.
    """

    passed: bool
    stationarity_residual: float
    cs_time_residual: float
    cs_range_residual: float
    time_slack: float
    range_slack: float
    violations: tuple[str, ...] = field(default_factory=tuple)


def _required_robot_hours(s: Scenario, tour: float) -> float:
    """Driving + service + (if in-interval) charging hours across the fleet."""
    hours = s.rho * tour / s.robot.speed + s.orders * s.service_time
    if s.charging_policy is ChargingPolicy.IN_INTERVAL:
        hours += s.phi * s.rho * tour * s.robot.consumption / s.robot.charge_rate
    return hours


def optimal_fleet_size(s: Scenario) -> float:
    """Smallest fleet meeting both the time and the range constraint.

    Both constraints are lower bounds on the fleet size and the cost grows
    with it, so the optimum is ``max(f_time, f_range)``. Fractional fleet
    sizes are reported as-is; zero orders need zero robots.
    """
    tour = s.tour_length()
    f_time = _required_robot_hours(s, tour) / s.interval
    f_range = s.rho * tour / s.robot.range
    return max(f_time, f_range)


def plan(s: Scenario) -> PlanResult:
    """Solve the interval: optimal fleet, costs, and binding-constraint report.

    ``total_cost`` is exactly ``P*f + L*maintenance + L*consumption*energy +
    depot_overhead``. The multiplier on the binding constraint carries the
    full marginal robot cost ``P``; the slack one is zero. ``feasible`` only
    turns false when a ``fleet_cap`` is set and exceeded, since the two
    constraints themselves are always satisfiable.
    """
    tour = s.tour_length()
    fixed = s.robot.fixed_cost
    f_time = _required_robot_hours(s, tour) / s.interval
    f_range = s.rho * tour / s.robot.range
    f_star = max(f_time, f_range)

    if math.isclose(f_time, f_range, rel_tol=1e-12, abs_tol=1e-15):
        binding = Binding.BOTH
    elif f_time > f_range:
        binding = Binding.TIME
    else:
        binding = Binding.RANGE
    if binding is Binding.RANGE:
        lambda1, lambda2 = 0.0, fixed
    else:
        lambda1, lambda2 = fixed, 0.0

    total = fixed * f_star + tour * s.maintenance_rate \
        + tour * s.robot.consumption * s.energy_price + s.depot_overhead
    average = total / s.orders if s.orders > 0 else math.nan
    route = tour / f_star if f_star > 0 else 0.0

    feasible = s.fleet_cap is None or f_star <= s.fleet_cap
    return PlanResult(
        fleet_size=f_star,
        fleet_size_ceil=math.ceil(f_star),
        tour_length=tour,
        avg_route_length=route,
        total_cost=total,
        average_cost=average,
        lambda1=lambda1,
        lambda2=lambda2,
        binding=binding,
        feasible=feasible,
    )


def average_cost(s: Scenario) -> float:
    """Per-order cost at the optimal fleet size, via the closed form.

    Identical (to rounding) to ``plan(s).average_cost``; kept as a separate
    closed-form evaluation so the two routes can be checked against each
    other. Depot overhead, when present, is spread over the interval's
    orders. Undefined for zero demand.
    """
    if s.orders <= 0:
        raise ValidationError("average cost: undefined for orders <= 0")
    # Range-bound scenarios fall outside the closed form; defer to the plan.
    if plan_binding_is_range(s):
        return plan(s).average_cost
    fixed, robot = s.robot.fixed_cost, s.robot
    bracket = (fixed / s.interval) * (s.rho / robot.speed)
    if s.charging_policy is ChargingPolicy.IN_INTERVAL:
        bracket += (fixed / s.interval) * (s.phi * s.rho * robot.consumption / robot.charge_rate)
    bracket += s.maintenance_rate + robot.consumption * s.energy_price
    factor = tour_length_factor(s.convention, s.c2)
    per_mile = factor * s.region.k * math.sqrt(s.region.area / s.orders) * bracket
    return per_mile + (fixed / s.interval) * s.service_time + s.depot_overhead / s.orders


def plan_binding_is_range(s: Scenario) -> bool:
    """True when the range constraint (not time) fixes the fleet size."""
    tour = s.tour_length()
    f_time = _required_robot_hours(s, tour) / s.interval
    f_range = s.rho * tour / s.robot.range
    return f_range > f_time


def avg_route_length(s: Scenario) -> float:
    """Tour length per robot at the optimal fleet size, miles.

    For time-bound scenarios this is the closed form
    ``t / (rho/v + sqrt(C)*(tau_p+tau_d)/(factor*k*sqrt(A)) + phi*rho*r_c/mu)``
    (charging term per policy); strictly decreasing in demand. Undefined for
    zero demand.
    """
    if s.orders <= 0:
        raise ValidationError("avg route length: undefined for orders <= 0")
    if plan_binding_is_range(s):
        return plan(s).avg_route_length
    robot = s.robot
    factor = tour_length_factor(s.convention, s.c2)
    denom = s.rho / robot.speed \
        + math.sqrt(s.orders) * s.service_time / (factor * s.region.k * math.sqrt(s.region.area))
    if s.charging_policy is ChargingPolicy.IN_INTERVAL:
        denom += s.phi * s.rho * robot.consumption / robot.charge_rate
    return s.interval / denom


#: Absolute tolerance on KKT residuals.
KKT_TOL = 1e-9


def kkt_verify(s: Scenario, result: PlanResult) -> KktCertificate:
    """Check the first-order optimality conditions for ``result``.

    Verifies stationarity (``lambda1 + lambda2 = P``), complementary
    slackness on both constraints, dual feasibility, and primal feasibility,
    each to within ``KKT_TOL``. Any violation is named in the certificate.
    """
    tour = s.tour_length()
    f = result.fleet_size
    # Through-multiplied slacks: budget minus requirement, valid at f = 0.
    time_slack = s.interval * f - _required_robot_hours(s, tour)
    range_slack = s.robot.range * f - s.rho * tour

    stationarity = abs(result.lambda1 + result.lambda2 - s.robot.fixed_cost)
    cs_time = abs(result.lambda1 * time_slack)
    cs_range = abs(result.lambda2 * range_slack)

    violations: list[str] = []
    if stationarity >= KKT_TOL:
        violations.append("stationarity")
    if cs_time >= KKT_TOL:
        violations.append("complementary_slackness_time")
    if cs_range >= KKT_TOL:
        violations.append("complementary_slackness_range")
    if result.lambda1 < -KKT_TOL or result.lambda2 < -KKT_TOL:
        violations.append("dual_feasibility")
    if time_slack < -KKT_TOL:
        violations.append("primal_time")
    if range_slack < -KKT_TOL:
        violations.append("primal_range")

    return KktCertificate(
        passed=not violations,
        stationarity_residual=stationarity,
        cs_time_residual=cs_time,
        cs_range_residual=cs_range,
        time_slack=time_slack,
        range_slack=range_slack,
        violations=tuple(violations),
    )
