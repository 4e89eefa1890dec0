"""Scenario/config files, multi-depot comparison, and report serialization.

Scenario files are JSON (see README for the schema). Region size comes
either from ``area_sq_mi`` or from a planar polygon ring in mile
coordinates (shoelace area); demand from a direct order count, a daily
total with an interval share, or an hourly arrival rate. Currency is only
rounded at serialization time, never inside computations.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

from .ca_model import DEFAULT_C2, LengthConvention, Metric, Region
from .errors import ValidationError
from .fleet_plan import ChargingPolicy, RobotSpec, Scenario, plan


def polygon_area(ring: list[tuple[float, float]] | list[list[float]]) -> float:
    """Shoelace area of a planar polygon ring (coordinates in miles).

    Accepts open or closed rings; orientation does not matter.
    """
    pts = [(float(x), float(y)) for x, y in ring]
    if len(pts) >= 2 and pts[0] == pts[-1]:
        pts = pts[:-1]
    if len(pts) < 3:
        raise ValidationError("region.polygon: needs at least 3 distinct vertices")
    twice = 0.0
    for (x1, y1), (x2, y2) in zip(pts, pts[1:] + pts[:1]):
        twice += x1 * y2 - x2 * y1
    return abs(twice) / 2.0


def _section(cfg: dict, name: str, required: bool = True) -> dict:
    value = cfg.get(name)
    if value is None:
        if required:
            raise ValidationError(f"{name}: section missing")
        return {}
    if not isinstance(value, dict):
        raise ValidationError(f"{name}: must be an object")
    return value


def _number(section: dict, path: str, key: str, required: bool = True) -> float | None:
    value = section.get(key)
    if value is None:
        if required:
            raise ValidationError(f"{path}.{key}: missing")
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{path}.{key}: must be a number, got {value!r}")
    return float(value)


def _region_from_dict(section: dict) -> Region:
    area = _number(section, "region", "area_sq_mi", required=False)
    polygon = section.get("polygon")
    if area is None and polygon is None:
        raise ValidationError("region: needs area_sq_mi or polygon")
    if area is None:
        area = polygon_area(polygon)
    metric = section.get("metric", "euclidean")
    try:
        metric = Metric(metric)
    except ValueError:
        raise ValidationError(f"region.metric: must be one of euclidean/manhattan/custom, got {metric!r}")
    k = _number(section, "region", "k", required=False)
    return Region(area=area, metric=metric, k=k)


def _robot_from_dict(section: dict) -> RobotSpec:
    speed = _number(section, "robot", "speed_mph")
    consumption = _number(section, "robot", "consumption_wh_per_mi")
    charge_rate = _number(section, "robot", "charge_rate_w")
    compartment = section.get("compartment")
    if compartment is None:
        raise ValidationError("robot.compartment: missing")
    if not isinstance(compartment, int) or isinstance(compartment, bool):
        raise ValidationError(f"robot.compartment: must be an integer, got {compartment!r}")
    range_mi = _number(section, "robot", "range_mi", required=False)
    battery = _number(section, "robot", "battery_wh", required=False)
    price = _number(section, "robot", "price_usd", required=False)
    lifespan = _number(section, "robot", "lifespan_days", required=False)
    fixed = _number(section, "robot", "fixed_cost_usd", required=False)
    if fixed is None:
        if price is None or lifespan is None:
            raise ValidationError("robot: needs price_usd+lifespan_days or fixed_cost_usd")
        if not (lifespan > 0):
            raise ValidationError(f"robot.lifespan_days: must be > 0, got {lifespan}")
        fixed = price / lifespan
    return RobotSpec(
        fixed_cost=fixed,
        speed=speed,
        consumption=consumption,
        charge_rate=charge_rate,
        compartment=compartment,
        range=range_mi,
        battery_capacity=battery,
        price=price,
        lifespan_days=lifespan,
    )


def scenario_from_dict(cfg: dict) -> Scenario:
    """Build and validate a Scenario from a schema-shaped dict.

    Fills the documented defaults (rho 1.25, phi 1.2, c2 0.1042, in-interval
    charging, eq9 convention, per-metric k) and raises ``ValidationError``
    naming the field on any violation.
    """
    if not isinstance(cfg, dict):
        raise ValidationError("scenario: top level must be an object")
    region = _region_from_dict(_section(cfg, "region"))
    robot = _robot_from_dict(_section(cfg, "robot"))

    demand = _section(cfg, "demand")
    interval = _number(_section(cfg, "interval"), "interval", "hours")
    orders = _number(demand, "demand", "orders", required=False)
    daily = _number(demand, "demand", "daily_orders", required=False)
    share = _number(demand, "demand", "share", required=False)
    rate = _number(demand, "demand", "arrival_rate", required=False)
    if orders is None:
        if daily is not None and share is not None:
            orders = daily * share
        elif rate is not None:
            orders = rate * interval
        else:
            raise ValidationError(
                "demand: needs orders, daily_orders+share, or arrival_rate"
            )

    service = _section(cfg, "service")
    pickup_min = _number(service, "service", "pickup_min")
    dropoff_min = _number(service, "service", "dropoff_min")
    if pickup_min < 0:
        raise ValidationError(f"service.pickup_min: must be >= 0, got {pickup_min}")
    if dropoff_min < 0:
        raise ValidationError(f"service.dropoff_min: must be >= 0, got {dropoff_min}")

    buffers = _section(cfg, "buffers", required=False)
    rho = _number(buffers, "buffers", "rho", required=False)
    phi = _number(buffers, "buffers", "phi", required=False)

    costs = _section(cfg, "costs")
    maintenance = _number(costs, "costs", "maintenance_usd_per_mi")
    energy_kwh = _number(costs, "costs", "energy_usd_per_kwh")
    overhead = _number(costs, "costs", "depot_overhead_usd", required=False)

    policy = _section(cfg, "policy", required=False)
    charging = policy.get("charging", "in_interval")
    try:
        charging = ChargingPolicy(charging)
    except ValueError:
        raise ValidationError(
            f"policy.charging: must be in_interval or external, got {charging!r}"
        )
    convention = policy.get("convention", "eq9")
    try:
        convention = LengthConvention(convention)
    except ValueError:
        raise ValidationError(
            f"policy.convention: must be eq9 or single_leg, got {convention!r}"
        )
    c2 = _number(policy, "policy", "c2", required=False)

    fleet_cap = _number(cfg, "scenario", "fleet_cap", required=False)

    return Scenario(
        region=region,
        robot=robot,
        orders=orders,
        interval=interval,
        pickup_time=pickup_min / 60.0,
        dropoff_time=dropoff_min / 60.0,
        maintenance_rate=maintenance,
        energy_price=energy_kwh / 1000.0,
        rho=1.25 if rho is None else rho,
        phi=1.2 if phi is None else phi,
        charging_policy=charging,
        convention=convention,
        depot_overhead=0.0 if overhead is None else overhead,
        arrival_rate=rate,
        daily_orders=daily,
        c2=DEFAULT_C2 if c2 is None else c2,
        fleet_cap=fleet_cap,
    )


def scenario_to_dict(s: Scenario) -> dict:
    """Schema-shaped dict for a Scenario, full precision (round-trips)."""
    robot: dict[str, Any] = {
        "speed_mph": s.robot.speed,
        "consumption_wh_per_mi": s.robot.consumption,
        "charge_rate_w": s.robot.charge_rate,
        "compartment": s.robot.compartment,
        "range_mi": s.robot.range,
    }
    if s.robot.battery_capacity is not None:
        robot["battery_wh"] = s.robot.battery_capacity
    if s.robot.price is not None and s.robot.lifespan_days is not None:
        robot["price_usd"] = s.robot.price
        robot["lifespan_days"] = s.robot.lifespan_days
    else:
        robot["fixed_cost_usd"] = s.robot.fixed_cost

    demand: dict[str, Any] = {"orders": s.orders}
    if s.daily_orders is not None:
        demand["daily_orders"] = s.daily_orders
    if s.arrival_rate is not None:
        demand["arrival_rate"] = s.arrival_rate

    costs: dict[str, Any] = {
        "maintenance_usd_per_mi": s.maintenance_rate,
        "energy_usd_per_kwh": s.energy_price * 1000.0,
    }
    if s.depot_overhead:
        costs["depot_overhead_usd"] = s.depot_overhead

    out: dict[str, Any] = {
        "region": {"area_sq_mi": s.region.area, "metric": s.region.metric.value, "k": s.region.k},
        "demand": demand,
        "interval": {"hours": s.interval},
        "service": {"pickup_min": s.pickup_time * 60.0, "dropoff_min": s.dropoff_time * 60.0},
        "buffers": {"rho": s.rho, "phi": s.phi},
        "robot": robot,
        "costs": costs,
        "policy": {
            "charging": s.charging_policy.value,
            "convention": s.convention.value,
            "c2": s.c2,
        },
    }
    if s.fleet_cap is not None:
        out["fleet_cap"] = s.fleet_cap
    return out


def load_scenario(path: str | Path) -> Scenario:
    """Load and validate a scenario JSON file."""
    raw = Path(path).read_text(encoding="utf-8")
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    return scenario_from_dict(cfg)


@dataclass(frozen=True)
class Depot:
    name: str
    region: Region
    orders: float
    depot_overhead: float = 0.0

    def __post_init__(self) -> None:
        if self.orders < 0:
            raise ValidationError(f"depot {self.name!r}: orders must be >= 0")
        if self.depot_overhead < 0:
            raise ValidationError(f"depot {self.name!r}: depot_overhead must be >= 0")


@dataclass(frozen=True)
class DepotPartition:
    """Named sub-regions with their order allocations, plus an optional parent
    region for the single-depot baseline."""

    depots: tuple[Depot, ...]
    parent: Region | None = None

    def __post_init__(self) -> None:
        names = [d.name for d in self.depots]
        if len(set(names)) != len(names):
            raise ValidationError("partition: depot names must be unique")
        if not self.depots:
            raise ValidationError("partition: needs at least one depot")


def load_partition(path: str | Path, like: Region | None = None) -> DepotPartition:
    """Load a partition file: a JSON list of depot rows.

    Depot regions inherit metric and routing constant from ``like`` when
    given (typically the base scenario's region).
    """
    raw = Path(path).read_text(encoding="utf-8")
    try:
        rows = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(rows, list):
        raise ValidationError("partition: top level must be a JSON list")
    metric = like.metric if like is not None else Metric.EUCLIDEAN
    k = like.k if like is not None else None
    depots = []
    for i, row in enumerate(rows):
        if not isinstance(row, dict):
            raise ValidationError(f"partition[{i}]: must be an object")
        name = row.get("name")
        if not isinstance(name, str) or not name:
            raise ValidationError(f"partition[{i}].name: must be a non-empty string")
        area = _number(row, f"partition[{i}]", "area_sq_mi")
        orders = _number(row, f"partition[{i}]", "orders")
        overhead = _number(row, f"partition[{i}]", "depot_overhead_usd", required=False)
        depots.append(
            Depot(
                name=name,
                region=Region(area=area, metric=metric, k=k),
                orders=orders,
                depot_overhead=overhead or 0.0,
            )
        )
    return DepotPartition(depots=tuple(depots))


@dataclass(frozen=True)
class ReportRow:
    name: str
    area: float  # sq mi
    orders: float
    fleet: float
    total_cost: float  # $
    average_cost: float  # $ per order


SUM_ROW = "Sum"
BASELINE_ROW = "Single depot"


def compare_depots(partition: DepotPartition, base: Scenario) -> list[ReportRow]:
    """Plan each depot independently under the base scenario's rates.

    Returns per-depot rows followed by an exact arithmetic sum row, plus a
    single-depot baseline row over the parent region when one is given.
    """
    rows: list[ReportRow] = []
    for depot in partition.depots:
        scenario = replace(
            base,
            region=depot.region,
            orders=depot.orders,
            depot_overhead=depot.depot_overhead,
            arrival_rate=None,
            daily_orders=None,
        )
        result = plan(scenario)
        rows.append(
            ReportRow(
                name=depot.name,
                area=depot.region.area,
                orders=depot.orders,
                fleet=result.fleet_size,
                total_cost=result.total_cost,
                average_cost=result.average_cost,
            )
        )
    total_orders = sum(r.orders for r in rows)
    total_cost = sum(r.total_cost for r in rows)
    rows.append(
        ReportRow(
            name=SUM_ROW,
            area=sum(r.area for r in rows),
            orders=total_orders,
            fleet=sum(r.fleet for r in rows),
            total_cost=total_cost,
            average_cost=total_cost / total_orders if total_orders > 0 else math.nan,
        )
    )
    if partition.parent is not None:
        scenario = replace(
            base,
            region=partition.parent,
            orders=total_orders,
            arrival_rate=None,
            daily_orders=None,
        )
        result = plan(scenario)
        rows.append(
            ReportRow(
                name=BASELINE_ROW,
                area=partition.parent.area,
                orders=total_orders,
                fleet=result.fleet_size,
                total_cost=result.total_cost,
                average_cost=result.average_cost,
            )
        )
    return rows


REPORT_FIELDS = ("name", "area_sq_mi", "orders", "fleet", "total_cost_usd", "average_cost_usd")


def _row_cells(row: ReportRow) -> list[str]:
    return [
        row.name,
        f"{row.area:.3f}",
        f"{row.orders:g}",
        f"{row.fleet:.2f}",
        f"{row.total_cost:.2f}",
        f"{row.average_cost:.2f}",
    ]


def emit_report(rows: list[ReportRow], format: str) -> bytes:
    """Serialize report rows deterministically.

    CSV applies the display rounding (2 decimals for dollars and fleet,
    3 for square miles); JSON keeps full precision so it round-trips.
    """
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_FIELDS)
        for row in rows:
            writer.writerow(_row_cells(row))
        return buf.getvalue().encode("utf-8")
    if format == "json":
        payload = [
            {
                "name": row.name,
                "area_sq_mi": row.area,
                "orders": row.orders,
                "fleet": row.fleet,
                "total_cost_usd": row.total_cost,
                "average_cost_usd": row.average_cost,
            }
            for row in rows
        ]
        return (json.dumps(payload, indent=2) + "\n").encode("utf-8")
    raise ValidationError(f"report format: must be json or csv, got {format!r}")


def parse_report(data: bytes, format: str) -> list[ReportRow]:
    """Inverse of :func:`emit_report` (exact for JSON, rounded for CSV)."""
    text = data.decode("utf-8")
    rows: list[ReportRow] = []
    if format == "json":
        for obj in json.loads(text):
            rows.append(
                ReportRow(
                    name=obj["name"],
                    area=obj["area_sq_mi"],
                    orders=obj["orders"],
                    fleet=obj["fleet"],
                    total_cost=obj["total_cost_usd"],
                    average_cost=obj["average_cost_usd"],
                )
            )
        return rows
    if format == "csv":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if tuple(header) != REPORT_FIELDS:
            raise ValidationError(f"report csv: unexpected header {header!r}")
        for cells in reader:
            rows.append(
                ReportRow(
                    name=cells[0],
                    area=float(cells[1]),
                    orders=float(cells[2]),
                    fleet=float(cells[3]),
                    total_cost=float(cells[4]),
                    average_cost=float(cells[5]),
                )
            )
        return rows
    raise ValidationError(f"report format: must be json or csv, got {format!r}")
