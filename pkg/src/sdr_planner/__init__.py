"""Fleet planning toolkit for sidewalk-delivery-robot food delivery.

Closed-form tour-length estimation, single-interval fleet sizing with a
KKT certificate, analytic trade-off derivatives with sweeps, scenario
file handling, and a Monte Carlo routing oracle that validates the
tour-length constants empirically.
"""

from .ca_model import (
    DEFAULT_C2,
    LengthConvention,
    Metric,
    Region,
    StopMix,
    integrated_tour_length,
    leg_length,
    short_circuit_factor,
    short_circuit_factor_limit,
    tour_length_factor,
)
from .errors import NotApplicableError, ValidationError
from .fleet_plan import (
    Binding,
    ChargingPolicy,
    KktCertificate,
    PlanResult,
    RobotSpec,
    Scenario,
    average_cost,
    avg_route_length,
    kkt_verify,
    optimal_fleet_size,
    plan,
)
from .mc_oracle import (
    ConstantsEstimate,
    RouteInstance,
    TourSolution,
    estimate_constants,
    gen_instance,
    separated_tour_lengths,
    solve_exact,
    solve_heuristic,
    validate_tour,
)
from .scenario_io import (
    Depot,
    DepotPartition,
    ReportRow,
    compare_depots,
    emit_report,
    load_partition,
    load_scenario,
    parse_report,
    polygon_area,
    scenario_from_dict,
    scenario_to_dict,
)
from .sensitivity import (
    FiniteDifferenceReport,
    LosLevel,
    SweepParameter,
    SweepSpec,
    SweepTable,
    apply_los,
    avg_cost_charge_rate_slope,
    avg_cost_demand_slope,
    finite_difference_check,
    sweep,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_C2",
    "Binding",
    "ChargingPolicy",
    "ConstantsEstimate",
    "Depot",
    "DepotPartition",
    "FiniteDifferenceReport",
    "KktCertificate",
    "LengthConvention",
    "LosLevel",
    "Metric",
    "NotApplicableError",
    "PlanResult",
    "Region",
    "ReportRow",
    "RobotSpec",
    "RouteInstance",
    "Scenario",
    "StopMix",
    "SweepParameter",
    "SweepSpec",
    "SweepTable",
    "TourSolution",
    "ValidationError",
    "apply_los",
    "average_cost",
    "avg_cost_charge_rate_slope",
    "avg_cost_demand_slope",
    "avg_route_length",
    "compare_depots",
    "emit_report",
    "estimate_constants",
    "finite_difference_check",
    "gen_instance",
    "integrated_tour_length",
    "kkt_verify",
    "leg_length",
    "load_partition",
    "load_scenario",
    "optimal_fleet_size",
    "parse_report",
    "plan",
    "polygon_area",
    "scenario_from_dict",
    "scenario_to_dict",
    "separated_tour_lengths",
    "short_circuit_factor",
    "short_circuit_factor_limit",
    "solve_exact",
    "solve_heuristic",
    "sweep",
    "tour_length_factor",
    "validate_tour",
]
