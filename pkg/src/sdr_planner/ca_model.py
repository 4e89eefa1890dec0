"""Continuous-approximation tour length for integrated pickup/drop-off routes.

The expected length of a good tour through ``n`` uniformly random stops in a
region of area ``A`` scales as ``k * sqrt(n * A)``, where ``k`` is a
dimensionless routing constant that depends on the distance metric
(0.763 Euclidean, 0.97 Manhattan grid).

Food-delivery routes interleave restaurant pickups with customer drop-offs,
which is cheaper than running a pickup-only leg followed by a drop-off-only
leg. The ``short_circuit_factor`` quantifies that efficiency gain: the
integrated route costs ``k_plus * (pickup leg + drop-off leg)`` with
``k_plus < 1``. When every order is a "short-circuiting" order (picked up at
one in-route stop, dropped at another, never touching the depot mid-route)
the factor collapses to the constant ``1/sqrt(2) + c2 ~= 0.81131``, so the
integrated tour over C orders is ``2 * 0.81131 * k * sqrt(A*C) ~=
1.62262 * k * sqrt(A*C)``.

Everything here is a pure function of its inputs and safe to call
concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import ValidationError

#: Additive regression constant in the short-circuit factor.
DEFAULT_C2 = 0.1042

#: Default routing constants per distance metric.
DEFAULT_K = {"euclidean": 0.763, "manhattan": 0.97}


class Metric(str, Enum):
    EUCLIDEAN = "euclidean"
    MANHATTAN = "manhattan"
    CUSTOM = "custom"


class LengthConvention(str, Enum):
    """Which closed form converts order count to integrated tour length.

    ``EQ9`` applies the doubled short-circuit factor (~1.62262) to the
    single-leg estimate: ``L = 1.62262 * k * sqrt(A*C)``. ``SINGLE_LEG``
    uses the bare estimate ``L = k * sqrt(A*C)``. Case-study figures in the
    source data split across the two, so the choice is an explicit scenario
    parameter rather than a constant.
    """

    EQ9 = "eq9"
    SINGLE_LEG = "single_leg"


@dataclass(frozen=True)
class Region:
    """Service region: an area, a distance metric, and its routing constant.

    ``k`` defaults per metric (0.763 Euclidean, 0.97 Manhattan); a custom
    metric requires an explicit ``k`` in (0, 2).
    """

    area: float
    metric: Metric = Metric.EUCLIDEAN
    k: float | None = None

    def __post_init__(self) -> None:
        if not (self.area > 0):
            raise ValidationError(f"region.area: must be > 0, got {self.area}")
        metric = Metric(self.metric)
        object.__setattr__(self, "metric", metric)
        if self.k is None:
            if metric is Metric.CUSTOM:
                raise ValidationError("region.k: required when metric is 'custom'")
            object.__setattr__(self, "k", DEFAULT_K[metric.value])
        else:
            if metric is Metric.CUSTOM and not (0 < self.k < 2):
                raise ValidationError(f"region.k: must be in (0, 2), got {self.k}")
            if not (self.k > 0):
                raise ValidationError(f"region.k: must be > 0, got {self.k}")


@dataclass(frozen=True)
class StopMix:
    """Composition of a route's stops for the general short-circuit factor.

    ``n_p`` and ``n_d`` count depot-anchored pickup-only and drop-off-only
    stops; ``n_sc`` counts short-circuiting orders (in-route pickup, in-route
    drop-off). ``sigma_p``/``sigma_d`` are orders per pickup/drop-off stop,
    ``capacity`` is the robot compartment size in orders, and ``c1``/``c2``
    are the regression constants of the factor formula. ``c1`` has no
    published value and must be supplied whenever ``n_p + n_d > 0``.
    """

    n_p: float
    n_d: float
    n_sc: float
    sigma_p: float = 1.0
    sigma_d: float = 1.0
    capacity: float = math.inf
    c1: float | None = None
    c2: float = DEFAULT_C2

    def __post_init__(self) -> None:
        for name in ("n_p", "n_d", "n_sc"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name}: must be >= 0")
        if self.sigma_p < 1 or self.sigma_d < 1:
            raise ValidationError("sigma_p, sigma_d: must be >= 1")
        if not (self.capacity >= 1):
            raise ValidationError("capacity: must be >= 1")

    @property
    def alpha(self) -> float:
        """Pickup share of depot-anchored stops, in [0, 1]."""
        return self.n_p / (self.n_p + self.n_d)

    @property
    def beta(self) -> float:
        """Short-circuit orders per depot-anchored stop."""
        return self.n_sc / (self.n_p + self.n_d)

    @property
    def capacity_ratio(self) -> float:
        """Compartment capacity over the peak load the route handles."""
        peak = max(self.n_d + self.n_sc, self.n_p + self.n_sc)
        return self.capacity / peak


def leg_length(n_stops: float, region: Region) -> float:
    """Expected single-leg tour length over ``n_stops`` uniform stops, miles.

    Returns ``k * sqrt(n_stops * area)``; zero for an empty leg.
    """
    if n_stops < 0:
        raise ValidationError(f"n_stops: must be >= 0, got {n_stops}")
    if n_stops == 0:
        return 0.0
    return region.k * math.sqrt(n_stops * region.area)


def short_circuit_factor_limit(c2: float = DEFAULT_C2) -> float:
    """Short-circuit factor when every order is a short-circuiting order.

    The general formula collapses to ``1/sqrt(2) + c2 ~= 0.81131`` in this
    limit; the compartment ratio drops out entirely.
    """
    return 1.0 / math.sqrt(2.0) + c2


def short_circuit_factor(mix: StopMix) -> float:
    """Efficiency factor for merging pickup and drop-off legs into one route.

    Evaluates the general mixed-stop formula; a mix with no depot-anchored
    stops is delegated to :func:`short_circuit_factor_limit`. Multiplying the
    sum of the separate pickup and drop-off leg lengths by this factor gives
    the integrated route length.
    """
    if mix.n_p + mix.n_d + mix.n_sc < 1:
        raise ValidationError("stop mix: needs at least one stop or order")
    if mix.n_p + mix.n_d == 0:
        # The alpha -> 0, beta -> inf limit; constant, c1-free.
        return short_circuit_factor_limit(mix.c2)
    if mix.c1 is None:
        raise ValidationError(
            "c1: required when the mix has depot-anchored stops (n_p + n_d > 0)"
        )
    q = mix.capacity_ratio
    if not (q > 0):
        raise ValidationError(f"capacity ratio: must be > 0, got {q}")
    a, b = mix.alpha, mix.beta
    routing = math.sqrt(1 + 2 * b) / (math.sqrt(1 - a + b) + math.sqrt(a + b))
    loading = mix.c1 * (math.sqrt(1 - a) + math.sqrt(a) - 1) * (1 / q - 0.5)
    circuit = mix.c2 * b / math.sqrt(1 + b * b)
    return routing + loading + circuit


def tour_length_factor(convention: LengthConvention, c2: float = DEFAULT_C2) -> float:
    """Multiplier applied to ``k * sqrt(A*C)`` under the given convention."""
    convention = LengthConvention(convention)
    if convention is LengthConvention.EQ9:
        return 2.0 * short_circuit_factor_limit(c2)
    return 1.0


def integrated_tour_length(
    orders: float,
    region: Region,
    convention: LengthConvention = LengthConvention.EQ9,
    c2: float = DEFAULT_C2,
) -> float:
    """Total integrated pickup+drop-off tour length for ``orders`` orders, miles.

    Assumes one order per pickup stop and per drop-off stop, so ``orders``
    pickup stops and ``orders`` drop-off stops. Fractional order counts are
    accepted. Zero orders gives a zero-length tour.
    """
    if orders < 0:
        raise ValidationError(f"orders: must be >= 0, got {orders}")
    if orders == 0:
        return 0.0
    return tour_length_factor(convention, c2) * region.k * math.sqrt(region.area * orders)
