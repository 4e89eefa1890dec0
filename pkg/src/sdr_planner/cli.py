"""Command-line interface.

Subcommands: ``plan``, ``sweep``, ``compare-depots``, ``validate-ca``,
``reproduce``. Output is deterministic for a fixed invocation and seed;
``json`` and ``csv`` are the stable formats, ``text`` is for humans. When a
report is written to a file with ``--out``, a companion PNG figure is
rendered next to it (disable with ``--no-figure``).

Exit codes: 0 success, 1 invalid input or flags, 2 reproduction-check
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable

from .ca_model import Metric
from .errors import NotApplicableError, ValidationError
from .fleet_plan import PlanResult, kkt_verify, plan
from .mc_oracle import ConstantsEstimate, estimate_constants
from .reproduce import fixtures_dir, format_table, run_checks
from .scenario_io import compare_depots, emit_report, load_partition, scenario_from_dict
from .sensitivity import SweepParameter, SweepSpec, SweepTable, sweep

#: Dotted config paths --set may touch; anything else is an unknown field.
_KNOWN_PATHS = {
    "region.area_sq_mi", "region.polygon", "region.metric", "region.k",
    "demand.orders", "demand.daily_orders", "demand.share", "demand.arrival_rate",
    "interval.hours",
    "service.pickup_min", "service.dropoff_min",
    "buffers.rho", "buffers.phi",
    "robot.price_usd", "robot.lifespan_days", "robot.fixed_cost_usd",
    "robot.speed_mph", "robot.range_mi", "robot.battery_wh",
    "robot.consumption_wh_per_mi", "robot.charge_rate_w", "robot.compartment",
    "costs.maintenance_usd_per_mi", "costs.energy_usd_per_kwh", "costs.depot_overhead_usd",
    "policy.charging", "policy.convention", "policy.c2",
    "fleet_cap",
}

#: CLI sweep units -> scenario-native units (minutes to hours, $/kWh to $/Wh).
_SWEEP_SCALE = {
    SweepParameter.PICKUP_TIME: 1 / 60,
    SweepParameter.DROPOFF_TIME: 1 / 60,
    SweepParameter.ENERGY_PRICE: 1 / 1000,
}

_SWEEP_COLUMN = {
    SweepParameter.ORDERS_C: "orders",
    SweepParameter.DEMAND_SHARE: "demand_share",
    SweepParameter.INTERVAL_T: "interval_hours",
    SweepParameter.PICKUP_TIME: "pickup_time_hours",
    SweepParameter.DROPOFF_TIME: "dropoff_time_hours",
    SweepParameter.CHARGE_RATE: "charge_rate_w",
    SweepParameter.SPEED: "speed_mph",
    SweepParameter.ENERGY_PRICE: "energy_usd_per_wh",
    SweepParameter.MAINTENANCE_RATE: "maintenance_usd_per_mi",
    SweepParameter.ROBOT_PRICE: "robot_price_usd",
}


class _CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags by default; the contract here is exit 1
    # with the offending name in the message.
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _CliError(message)


def _set_override(cfg: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ValidationError(f"--set: expected key=value, got {assignment!r}")
    key, raw = assignment.split("=", 1)
    key = key.strip()
    if key not in _KNOWN_PATHS:
        raise ValidationError(f"--set: unknown field {key!r}")
    try:
        value: Any = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = cfg
    parts = key.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ValidationError(f"--set: {key}: {part} is not an object")
    node[parts[-1]] = value


def _load_scenario_config(path: str | Path, sets: list[str]) -> dict:
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    for assignment in sets or []:
        _set_override(cfg, assignment)
    return cfg


def _jsonable(value: float) -> float | None:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _plan_dict(result: PlanResult) -> dict:
    return {
        "fleet_size": result.fleet_size,
        "fleet_size_ceil": result.fleet_size_ceil,
        "tour_length_mi": result.tour_length,
        "avg_route_length_mi": result.avg_route_length,
        "total_cost_usd": result.total_cost,
        "average_cost_usd": _jsonable(result.average_cost),
        "lambda1": result.lambda1,
        "lambda2": result.lambda2,
        "binding": result.binding.value,
        "feasible": result.feasible,
    }


def _csv_bytes(header: list[str], rows: list[list[Any]]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().encode("utf-8")


def _write_output(args: argparse.Namespace, data: bytes,
                  figure: Callable[[Path], None] | None = None) -> None:
    out = getattr(args, "out", None)
    if out is None:
        sys.stdout.write(data.decode("utf-8"))
        return
    out = Path(out)
    out.write_bytes(data)
    if figure is not None and args.output != "text" and not args.no_figure:
        figure(out.with_suffix(".png"))


# ---------------------------------------------------------------------------
# Subcommands.
# ---------------------------------------------------------------------------


def _cmd_plan(args: argparse.Namespace) -> int:
    scenario = scenario_from_dict(_load_scenario_config(args.scenario, args.set))
    result = plan(scenario)
    payload = _plan_dict(result)
    if args.output == "json":
        certificate = kkt_verify(scenario, result)
        payload["kkt_passed"] = certificate.passed
        data = (json.dumps(payload, indent=2) + "\n").encode("utf-8")
    elif args.output == "csv":
        data = _csv_bytes(list(payload), [list(payload.values())])
    else:
        lines = [
            f"fleet size        {result.fleet_size:.2f} (ceil {result.fleet_size_ceil})",
            f"tour length       {result.tour_length:.3f} mi",
            f"route per robot   {result.avg_route_length:.3f} mi",
            f"total cost        ${result.total_cost:.2f}",
            f"average cost      ${result.average_cost:.2f}/order"
            if math.isfinite(result.average_cost) else "average cost      n/a",
            f"binding           {result.binding.value}",
            f"feasible          {str(result.feasible).lower()}",
        ]
        data = ("\n".join(lines) + "\n").encode("utf-8")
    _write_output(args, data)
    return 0


def _sweep_rows(table: SweepTable) -> tuple[list[str], list[list[Any]]]:
    header = [
        _SWEEP_COLUMN[table.parameter],
        "fleet_size",
        "tour_length_mi",
        "avg_route_length_mi",
        "total_cost_usd",
        "average_cost_usd",
    ]
    rows = [
        [v, r.fleet_size, r.tour_length, r.avg_route_length, r.total_cost,
         _jsonable(r.average_cost)]
        for v, r in zip(table.values, table.results)
    ]
    return header, rows


def _cmd_sweep(args: argparse.Namespace) -> int:
    scenario = scenario_from_dict(_load_scenario_config(args.scenario, args.set))
    parameter = SweepParameter(args.param)
    scale = _SWEEP_SCALE.get(parameter, 1.0)
    spec = SweepSpec(
        parameter=parameter,
        start=args.start * scale,
        stop=args.stop * scale,
        steps=args.steps,
        baseline=scenario,
    )
    table = sweep(spec)
    header, rows = _sweep_rows(table)
    if args.output == "json":
        payload = {
            "parameter": _SWEEP_COLUMN[parameter],
            "monotonicity": table.monotonicity,
            "rows": [dict(zip(header, row)) for row in rows],
        }
        data = (json.dumps(payload, indent=2) + "\n").encode("utf-8")
    elif args.output == "csv":
        data = _csv_bytes(header, rows)
    else:
        lines = ["  ".join(f"{h:>20}" for h in header)]
        for row in rows:
            lines.append("  ".join(f"{v:>20.6g}" if isinstance(v, float) else f"{v!s:>20}" for v in row))
        lines.append("monotonicity: " + json.dumps(table.monotonicity))
        data = ("\n".join(lines) + "\n").encode("utf-8")

    def figure(path: Path) -> None:
        from .figures import render_sweep_figure

        render_sweep_figure(table, path)

    _write_output(args, data, figure)
    return 0


def _cmd_compare_depots(args: argparse.Namespace) -> int:
    # Default base pairs with the bundled partition: same rates, doubled
    # tour-length factor (the convention the published table follows).
    scenario_path = args.scenario or fixtures_dir() / "table1_scenario.json"
    base = scenario_from_dict(_load_scenario_config(scenario_path, args.set))
    partition = load_partition(args.partition, like=base.region)
    if args.parent_baseline:
        partition = replace(partition, parent=base.region)
    rows = compare_depots(partition, base)
    if args.output in ("json", "csv"):
        data = emit_report(rows, args.output)
    else:
        width = max(len(r.name) for r in rows)
        lines = [
            f"{'name':<{width}}  {'area':>7}  {'orders':>7}  {'fleet':>7}  {'cost':>9}  {'avg':>6}"
        ]
        for r in rows:
            lines.append(
                f"{r.name:<{width}}  {r.area:>7.3f}  {r.orders:>7g}  {r.fleet:>7.2f}"
                f"  {r.total_cost:>9.2f}  {r.average_cost:>6.2f}"
            )
        data = ("\n".join(lines) + "\n").encode("utf-8")

    def figure(path: Path) -> None:
        from .figures import render_depot_figure

        render_depot_figure(rows, path)

    _write_output(args, data, figure)
    return 0


def _estimate_dict(est: ConstantsEstimate) -> dict:
    return {
        "n_orders": est.n_orders,
        "area_sq_mi": est.area,
        "metric": est.metric.value,
        "trials": est.trials,
        "seed": est.seed,
        "rho": est.rho,
        "k_hat": est.k_hat,
        "kplus_hat": est.kplus_hat,
        "rho_quantile": est.rho_quantile,
    }


def _cmd_validate_ca(args: argparse.Namespace) -> int:
    estimate = estimate_constants(
        n_orders=args.orders,
        area=args.area,
        metric=Metric(args.metric),
        trials=args.trials,
        seed=args.seed,
        rho=args.rho,
    )
    if args.output == "json":
        payload = _estimate_dict(estimate)
        payload["trials_detail"] = [
            {
                "trial": i,
                "integrated_mi": estimate.integrated_lengths[i],
                "pickup_leg_mi": estimate.pickup_leg_lengths[i],
                "dropoff_leg_mi": estimate.dropoff_leg_lengths[i],
                "k_sample": estimate.k_samples[i],
                "kplus_sample": estimate.kplus_samples[i],
            }
            for i in range(estimate.trials)
        ]
        data = (json.dumps(payload, indent=2) + "\n").encode("utf-8")
    elif args.output == "csv":
        header = ["trial", "integrated_mi", "pickup_leg_mi", "dropoff_leg_mi",
                  "k_sample", "kplus_sample"]
        rows: list[list[Any]] = [
            [i, estimate.integrated_lengths[i], estimate.pickup_leg_lengths[i],
             estimate.dropoff_leg_lengths[i], estimate.k_samples[i], estimate.kplus_samples[i]]
            for i in range(estimate.trials)
        ]
        mean_int = sum(estimate.integrated_lengths) / estimate.trials
        mean_p = sum(estimate.pickup_leg_lengths) / estimate.trials
        mean_d = sum(estimate.dropoff_leg_lengths) / estimate.trials
        rows.append(["mean", mean_int, mean_p, mean_d, estimate.k_hat, estimate.kplus_hat])
        data = _csv_bytes(header, rows)
    else:
        lines = [
            f"trials            {estimate.trials} (n={estimate.n_orders}, "
            f"area={estimate.area:g} sq mi, {estimate.metric.value})",
            f"k_hat             {estimate.k_hat:.4f}",
            f"kplus_hat         {estimate.kplus_hat:.4f}",
            f"rho quantile      {estimate.rho_quantile:.3f} (buffer {estimate.rho:g})",
        ]
        data = ("\n".join(lines) + "\n").encode("utf-8")

    def figure(path: Path) -> None:
        from .figures import render_validation_figure

        render_validation_figure(estimate, path)

    _write_output(args, data, figure)
    return 0


def _cmd_reproduce(args: argparse.Namespace) -> int:
    checks = run_checks()
    if args.output == "json":
        payload = [
            {"name": c.name, "actual": c.actual, "expected": c.expected, "passed": c.passed}
            for c in checks
        ]
        data = (json.dumps(payload, indent=2) + "\n").encode("utf-8")
    elif args.output == "csv":
        data = _csv_bytes(
            ["name", "actual", "expected", "passed"],
            [[c.name, c.actual, c.expected, c.passed] for c in checks],
        )
    else:
        data = format_table(checks).encode("utf-8")
    _write_output(args, data)
    return 0 if all(c.passed for c in checks) else 2


# ---------------------------------------------------------------------------
# Parser assembly.
# ---------------------------------------------------------------------------


def _add_common(sub: argparse.ArgumentParser, with_set: bool = True) -> None:
    sub.add_argument("--output", choices=("json", "csv", "text"), default="text")
    sub.add_argument("--out", metavar="PATH", help="write output to a file instead of stdout")
    sub.add_argument("--no-figure", action="store_true",
                     help="skip the companion PNG when writing --out reports")
    if with_set:
        sub.add_argument("--set", action="append", metavar="KEY=VALUE", default=[],
                         help="override a scenario field (repeatable), e.g. policy.convention=eq9")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sdr-planner", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("plan", help="optimal fleet size and costs for a scenario")
    p.add_argument("scenario", help="scenario JSON file")
    _add_common(p)
    p.set_defaults(func=_cmd_plan)

    p = commands.add_parser("sweep", help="evaluate the plan over a parameter grid")
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("--param", required=True, choices=[m.value for m in SweepParameter])
    p.add_argument("--from", dest="start", type=float, required=True,
                   help="grid start (pickup/dropoff time in minutes, energy price in $/kWh)")
    p.add_argument("--to", dest="stop", type=float, required=True, help="grid end")
    p.add_argument("--steps", type=int, required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_sweep)

    p = commands.add_parser("compare-depots", help="plan each depot of a partition file")
    p.add_argument("partition", help="partition JSON file (list of depots)")
    p.add_argument("--scenario", help="base scenario file (default: bundled lunch fixture)")
    p.add_argument("--parent-baseline", action="store_true",
                   help="also plan the base region as a single-depot baseline")
    _add_common(p)
    p.set_defaults(func=_cmd_compare_depots)

    p = commands.add_parser("validate-ca", help="Monte Carlo check of the routing constants")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--orders", type=int, default=100)
    p.add_argument("--area", type=float, default=1.0)
    p.add_argument("--metric", choices=("euclidean", "manhattan"), default="euclidean")
    p.add_argument("--rho", type=float, default=1.25, help="route-length buffer to test")
    _add_common(p, with_set=False)
    p.set_defaults(func=_cmd_validate_ca)

    p = commands.add_parser("reproduce", help="run the bundled fixture suite against published numbers")
    _add_common(p, with_set=False)
    p.set_defaults(func=_cmd_reproduce)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValidationError, NotApplicableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
