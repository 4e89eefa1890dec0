"""Monte Carlo routing oracle for the tour-length constants.

The planner's closed forms lean on three empirical quantities: the routing
constant ``k`` (tour length over n uniform stops ~ ``k*sqrt(n*A)``), the
integration factor ``k_plus`` (integrated pickup+drop-off tour over the sum
of the two separate legs), and the route-length buffer ``rho = 1.25``. This
module checks all three at desk scale by generating random
pickup/delivery instances, solving them exactly (small) or heuristically
(larger), and measuring the ratios directly.

Stop indexing convention: matrix index 0 is the depot, ``1..n`` are pickup
stops (order i at ``1+i``), ``n+1..2n`` are drop-off stops (order i at
``n+1+i``). Every tour starts and ends at the depot, visits each stop once,
picks an order up before dropping it off, and never carries more than the
compartment capacity.

Trials are independent; per-trial seeds derive deterministically from
(master seed, trial index), so serial and parallel execution produce the
same statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ca_model import Metric
from .errors import ValidationError

#: Largest order count the exact bitmask solver accepts (12 non-depot stops).
EXACT_ORDER_CAP = 6

#: Minimum improvement for a local-search move to be applied.
_EPS = 1e-10

_FAR = 1 << 30


@dataclass(frozen=True, eq=False)
class RouteInstance:
    """One random routing instance on a square region."""

    depot: tuple[float, float]
    pickups: np.ndarray  # (n, 2) miles
    dropoffs: np.ndarray  # (n, 2) miles
    region_side: float  # miles
    metric: Metric
    capacity: int | None
    seed: int

    def __post_init__(self) -> None:
        if self.pickups.shape != self.dropoffs.shape:
            raise ValidationError("instance: pickups and dropoffs must pair up")
        pts = np.vstack([self.pickups.reshape(-1, 2), self.dropoffs.reshape(-1, 2)])
        if pts.size and (pts.min() < 0 or pts.max() > self.region_side):
            raise ValidationError("instance: points must lie inside the square")
        if self.capacity is not None and self.capacity < 1:
            raise ValidationError("instance.capacity: must be >= 1")

    @property
    def n_orders(self) -> int:
        return len(self.pickups)


@dataclass(frozen=True)
class TourSolution:
    """A feasible tour: stop visit order (depot at both ends) and its length."""

    order: tuple[int, ...]
    length: float
    exact: bool


def gen_instance(
    n_orders: int,
    area: float,
    metric: Metric = Metric.EUCLIDEAN,
    capacity: int | None = None,
    seed: int = 0,
) -> RouteInstance:
    """Draw pickup and drop-off points i.i.d. uniform on a square of ``area``.

    The depot sits at the square's center. Deterministic for a fixed seed.
    """
    if n_orders < 0:
        raise ValidationError(f"n_orders: must be >= 0, got {n_orders}")
    if not (area > 0):
        raise ValidationError(f"area: must be > 0, got {area}")
    metric = Metric(metric)
    if metric is Metric.CUSTOM:
        raise ValidationError("metric: oracle supports euclidean or manhattan")
    side = math.sqrt(area)
    rng = np.random.Generator(np.random.PCG64(seed))
    pickups = rng.uniform(0.0, side, size=(n_orders, 2))
    dropoffs = rng.uniform(0.0, side, size=(n_orders, 2))
    return RouteInstance(
        depot=(side / 2.0, side / 2.0),
        pickups=pickups,
        dropoffs=dropoffs,
        region_side=side,
        metric=metric,
        capacity=capacity,
        seed=seed,
    )


def stop_matrix(inst: RouteInstance) -> np.ndarray:
    """Full distance matrix over depot + pickups + dropoffs."""
    pts = np.vstack([np.array([inst.depot]), inst.pickups.reshape(-1, 2), inst.dropoffs.reshape(-1, 2)])
    diff = pts[:, None, :] - pts[None, :, :]
    if inst.metric is Metric.MANHATTAN:
        return np.abs(diff).sum(axis=-1)
    return np.sqrt((diff**2).sum(axis=-1))


def _partners(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Partner stop index and pickup mask over matrix indices 0..2n."""
    partner = np.zeros(2 * n + 1, dtype=np.int64)
    partner[1 : n + 1] = np.arange(n + 1, 2 * n + 1)
    partner[n + 1 :] = np.arange(1, n + 1)
    is_pickup = np.zeros(2 * n + 1, dtype=bool)
    is_pickup[1 : n + 1] = True
    return partner, is_pickup


def _route_length(route: np.ndarray, D: np.ndarray) -> float:
    return float(D[route[:-1], route[1:]].sum())


def _positions(route: np.ndarray, n_stops: int) -> np.ndarray:
    pos = np.zeros(n_stops, dtype=np.int64)
    pos[route] = np.arange(len(route))
    return pos


def _capacity_ok(route: np.ndarray, is_pickup: np.ndarray, capacity: int | None) -> bool:
    if capacity is None:
        return True
    step = np.where(is_pickup[route], 1, np.where(route > 0, -1, 0))
    return int(np.cumsum(step).max()) <= capacity


def validate_tour(inst: RouteInstance, solution: TourSolution) -> None:
    """Raise unless the tour is feasible and its length is as claimed."""
    order = np.asarray(solution.order)
    n = inst.n_orders
    if order[0] != 0 or order[-1] != 0:
        raise ValidationError("tour: must start and end at the depot")
    interior = order[1:-1]
    expected = np.arange(1, 2 * n + 1)
    if not np.array_equal(np.sort(interior), expected):
        raise ValidationError("tour: must visit every stop exactly once")
    pos = _positions(order, 2 * n + 1)
    if n and not (pos[1 : n + 1] < pos[n + 1 : 2 * n + 1]).all():
        raise ValidationError("tour: every pickup must precede its drop-off")
    _, is_pickup = _partners(n)
    if not _capacity_ok(order, is_pickup, inst.capacity):
        raise ValidationError("tour: compartment capacity exceeded")
    length = _route_length(order, stop_matrix(inst))
    if not math.isclose(length, solution.length, rel_tol=1e-9, abs_tol=1e-9):
        raise ValidationError(
            f"tour: claimed length {solution.length} but edges sum to {length}"
        )


# ---------------------------------------------------------------------------
# Exact solver: dynamic program over visited-stop subsets.
# ---------------------------------------------------------------------------


def solve_exact(inst: RouteInstance) -> TourSolution:
    """Minimum-length feasible tour via a bitmask dynamic program.

    State = (set of visited stops, last stop); transitions respect pickup
    precedence and compartment capacity. Limited to ``EXACT_ORDER_CAP``
    orders (the state space is ``2^(2n) * 2n``).
    """
    n = inst.n_orders
    if n == 0:
        return TourSolution(order=(0, 0), length=0.0, exact=True)
    if n > EXACT_ORDER_CAP:
        raise ValidationError(
            f"solve_exact: limited to {EXACT_ORDER_CAP} orders, got {n}; use solve_heuristic"
        )
    D = stop_matrix(inst)
    m = 2 * n
    cap = math.inf if inst.capacity is None else float(inst.capacity)
    d0 = D[0, 1:]
    Dss = D[1:, 1:]

    size = 1 << m
    all_masks = np.arange(size, dtype=np.int64)
    bits = ((all_masks[:, None] >> np.arange(m)) & 1).astype(bool)
    loads = bits[:, :n].sum(axis=1) - bits[:, n:].sum(axis=1)

    dp = np.full((size, m), np.inf)
    par = np.full((size, m), -1, dtype=np.int8)
    if cap >= 1:
        for s in range(n):
            dp[1 << s, s] = d0[s]

    for mask in range(1, size):
        row = dp[mask]
        finite = np.isfinite(row)
        if not finite.any():
            continue
        visited = bits[mask]
        can_pick = ~visited[:n] & (loads[mask] + 1 <= cap)
        can_drop = ~visited[n:] & visited[:n]
        allowed = np.concatenate([can_pick, can_drop])
        if not allowed.any():
            continue
        cand = np.where(finite[:, None], row[:, None] + Dss, np.inf)
        best = cand.min(axis=0)
        barg = cand.argmin(axis=0)
        for j in np.nonzero(allowed)[0]:
            nxt = mask | (1 << j)
            if best[j] < dp[nxt, j]:
                dp[nxt, j] = best[j]
                par[nxt, j] = barg[j]

    full = size - 1
    closing = dp[full] + d0
    last = int(np.argmin(closing))
    length = float(closing[last])

    seq = []
    mask, j = full, last
    while j >= 0:
        seq.append(j)
        prev = int(par[mask, j])
        mask ^= 1 << j
        j = prev
    order = (0, *[s + 1 for s in reversed(seq)], 0)
    return TourSolution(order=order, length=length, exact=True)


# ---------------------------------------------------------------------------
# Heuristic solver: cheapest insertion + precedence-preserving 2-opt/or-opt.
# ---------------------------------------------------------------------------


def _two_opt_pass(
    route: np.ndarray,
    D: np.ndarray,
    partner: np.ndarray | None,
    is_pickup: np.ndarray | None,
    capacity: int | None,
) -> tuple[np.ndarray, bool]:
    """One sweep of segment reversals; applies improving feasible moves.

    A reversal of positions [i..j] is precedence-safe iff the segment holds
    no complete pickup/drop-off pair.
    """
    m = len(route) - 2
    improved = False
    n_stops = D.shape[0]
    for i in range(1, m):
        pos = _positions(route, n_stops)
        a, ri = route[i - 1], route[i]
        rj = route[i + 1 : m + 1]
        rj1 = route[i + 2 : m + 2]
        delta = D[a, rj] + D[ri, rj1] - D[a, ri] - D[rj, rj1]
        if partner is not None:
            span = route[i : m + 1]
            inner_pair = np.where(is_pickup[span], pos[partner[span]], _FAR)
            cummin = np.minimum.accumulate(inner_pair)
            feasible = cummin[1:] > np.arange(i + 1, m + 1)
            delta = np.where(feasible, delta, np.inf)
        for rel in np.argsort(delta, kind="stable"):
            if delta[rel] >= -_EPS:
                break
            j = i + 1 + rel
            candidate = route.copy()
            candidate[i : j + 1] = route[i : j + 1][::-1]
            if _capacity_ok(candidate, is_pickup, capacity):
                route = candidate
                improved = True
                break
    return route, improved


def _or_opt_pass(
    route: np.ndarray,
    D: np.ndarray,
    partner: np.ndarray | None,
    is_pickup: np.ndarray | None,
    capacity: int | None,
) -> tuple[np.ndarray, bool]:
    """One sweep relocating segments of 1-3 stops (orientation preserved)."""
    improved = False
    n_stops = D.shape[0]
    for seg_len in (1, 2, 3):
        s = 1
        while s + seg_len - 1 <= len(route) - 2:
            seg = route[s : s + seg_len]
            before, after = route[s - 1], route[s + seg_len]
            gain = D[before, seg[0]] + D[seg[-1], after] - D[before, after]
            # Triangle inequality bounds the insertion cost below by
            # -D[seg ends], so the move cannot win unless the removal gain
            # clears that.
            if gain + D[seg[0], seg[-1]] <= _EPS:
                s += 1
                continue
            rem = np.concatenate([route[:s], route[s + seg_len :]])
            a, b = rem[:-1], rem[1:]
            delta = D[a, seg[0]] + D[seg[-1], b] - D[a, b] - gain
            delta[s - 1] = np.inf
            if partner is not None:
                pos_rem = _positions(rem, n_stops)
                lo, hi = 0, len(rem) - 1
                for x in seg:
                    px = partner[x]
                    if (seg == px).any():
                        continue
                    if is_pickup[x]:
                        hi = min(hi, pos_rem[px])
                    else:
                        lo = max(lo, pos_rem[px])
                delta[:lo] = np.inf
                delta[hi:] = np.inf
            for p in np.argsort(delta, kind="stable"):
                if delta[p] >= -_EPS:
                    break
                candidate = np.concatenate([rem[: p + 1], seg, rem[p + 1 :]])
                if _capacity_ok(candidate, is_pickup, capacity):
                    route = candidate
                    improved = True
                    break
            s += 1
    return route, improved


def _local_search(
    route: np.ndarray,
    D: np.ndarray,
    partner: np.ndarray | None = None,
    is_pickup: np.ndarray | None = None,
    capacity: int | None = None,
) -> np.ndarray:
    improved = True
    while improved:
        route, imp_a = _two_opt_pass(route, D, partner, is_pickup, capacity)
        route, imp_b = _or_opt_pass(route, D, partner, is_pickup, capacity)
        improved = imp_a or imp_b
    return route


def _tsp_route(D: np.ndarray, node_ids: np.ndarray) -> tuple[np.ndarray, float]:
    """Depot-rooted tour over a node subset: nearest neighbor + local search."""
    if len(node_ids) == 0:
        return np.array([0, 0], dtype=np.int64), 0.0
    alive = np.ones(len(node_ids), dtype=bool)
    order = []
    current = 0
    for _ in range(len(node_ids)):
        dist = np.where(alive, D[current, node_ids], np.inf)
        pick = int(np.argmin(dist))
        order.append(int(node_ids[pick]))
        alive[pick] = False
        current = node_ids[pick]
    route = np.array([0, *order, 0], dtype=np.int64)
    route = _local_search(route, D)
    return route, _route_length(route, D)


def _cheapest_insertion(D: np.ndarray, n: int, is_pickup: np.ndarray, capacity: int | None) -> np.ndarray:
    """Insert each order's pickup/drop-off pair at its cheapest feasible slots."""
    route = np.array([0, 0], dtype=np.int64)
    cap = math.inf if capacity is None else capacity
    for i in range(n):
        pick, drop = 1 + i, 1 + n + i
        a, b = route[:-1], route[1:]
        pd = D[a, pick] + D[pick, b] - D[a, b]
        dd = D[a, drop] + D[drop, b] - D[a, b]
        adjacent = D[a, pick] + D[pick, drop] + D[drop, b] - D[a, b]
        # Separated insertion: pickup in slot p, drop-off in a later slot d.
        pair = pd[:, None] + dd[None, :]
        slot = np.arange(len(a))
        pair[slot[:, None] >= slot[None, :]] = np.inf
        if cap is not math.inf:
            step = np.where(is_pickup[route], 1, np.where(route > 0, -1, 0))
            load = np.cumsum(step)[:-1]  # carried load on each edge slot
            adjacent[load > cap - 1] = np.inf
            # A pickup at slot p and drop at slot d put one extra unit on
            # every edge the order rides: the split edges at p and d plus
            # everything between. window_max[p, d] = max(load[p..d]).
            from_p = np.where(slot[:, None] <= slot[None, :], load[None, :], -np.inf)
            window_max = np.maximum.accumulate(from_p, axis=1)
            pair[window_max > cap - 1] = np.inf
        best_adj = int(np.argmin(adjacent))
        flat = int(np.argmin(pair))
        p_sep, d_sep = divmod(flat, pair.shape[1])
        if adjacent[best_adj] <= pair[p_sep, d_sep]:
            p = best_adj
            route = np.concatenate([route[: p + 1], [pick, drop], route[p + 1 :]])
        else:
            route = np.concatenate(
                [route[: p_sep + 1], [pick], route[p_sep + 1 : d_sep + 1], [drop], route[d_sep + 1 :]]
            )
    return route


def _solve_heuristic_inner(
    inst: RouteInstance, D: np.ndarray
) -> tuple[TourSolution, float, float]:
    """Heuristic tour plus the two separated leg lengths it was seeded from."""
    n = inst.n_orders
    if n == 0:
        return TourSolution(order=(0, 0), length=0.0, exact=False), 0.0, 0.0
    partner, is_pickup = _partners(n)
    pickup_ids = np.arange(1, n + 1)
    dropoff_ids = np.arange(n + 1, 2 * n + 1)
    p_route, p_len = _tsp_route(D, pickup_ids)
    d_route, d_len = _tsp_route(D, dropoff_ids)

    route = _cheapest_insertion(D, n, is_pickup, inst.capacity)
    if inst.capacity is None or inst.capacity >= n:
        # All pickups then all drop-offs is feasible and, by the triangle
        # inequality, no longer than the two separate depot-rooted legs;
        # seeding with it pins the integrated tour at or below their sum.
        stacked = np.concatenate([[0], p_route[1:-1], d_route[1:-1], [0]])
        if _route_length(stacked, D) < _route_length(route, D):
            route = stacked
    route = _local_search(route, D, partner, is_pickup, inst.capacity)
    solution = TourSolution(
        order=tuple(int(s) for s in route),
        length=_route_length(route, D),
        exact=False,
    )
    return solution, p_len, d_len


def solve_heuristic(inst: RouteInstance) -> TourSolution:
    """Feasible near-optimal tour for instances of any size.

    Cheapest-insertion construction (seeded against the stacked
    pickups-then-drop-offs tour when capacity allows), then
    precedence-preserving 2-opt and or-opt to a local optimum.
    Deterministic for a fixed instance.
    """
    solution, _, _ = _solve_heuristic_inner(inst, stop_matrix(inst))
    return solution


def separated_tour_lengths(inst: RouteInstance) -> tuple[float, float]:
    """Lengths of the separate depot-rooted pickup-only and drop-off-only tours.

    This is the no-integration baseline: serve all pickups in one closed
    route, then all drop-offs in another.
    """
    D = stop_matrix(inst)
    n = inst.n_orders
    _, p_len = _tsp_route(D, np.arange(1, n + 1))
    _, d_len = _tsp_route(D, np.arange(n + 1, 2 * n + 1))
    return p_len, d_len


# ---------------------------------------------------------------------------
# Constant estimation.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantsEstimate:
    """Empirical routing constants plus the per-trial samples behind them."""

    k_hat: float
    kplus_hat: float
    rho_quantile: float
    n_orders: int
    area: float
    metric: Metric
    trials: int
    seed: int
    rho: float
    k_samples: tuple[float, ...]
    kplus_samples: tuple[float, ...]
    integrated_lengths: tuple[float, ...]
    pickup_leg_lengths: tuple[float, ...]
    dropoff_leg_lengths: tuple[float, ...]


def trial_seed(master_seed: int, trial: int) -> int:
    """Deterministic, order-independent per-trial seed derivation."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(trial,))
    return int(ss.generate_state(1, np.uint64)[0])


def estimate_constants(
    n_orders: int,
    area: float,
    metric: Metric = Metric.EUCLIDEAN,
    trials: int = 100,
    seed: int = 0,
    capacity: int | None = None,
    rho: float = 1.25,
) -> ConstantsEstimate:
    """Estimate the routing constants over seeded random instances.

    Per trial: ``k`` from the drop-off-only tour over ``sqrt(n*A)``;
    ``k_plus`` from the integrated tour over the summed separate legs;
    finally the fraction of integrated tours within ``rho`` times the batch
    mean (the buffer calibration). Capacity defaults to unbounded, matching
    the regime where the integration factor is a constant.
    """
    if trials < 30:
        raise ValidationError(f"trials: must be >= 30 for stable estimates, got {trials}")
    if n_orders < 10:
        raise ValidationError(f"n_orders: must be >= 10 for k estimates, got {n_orders}")
    if seed < 0:
        raise ValidationError(f"seed: must be >= 0, got {seed}")
    k_samples = []
    kplus_samples = []
    integrated = []
    pickup_lens = []
    dropoff_lens = []
    root = math.sqrt(n_orders * area)
    for trial in range(trials):
        inst = gen_instance(n_orders, area, metric, capacity, trial_seed(seed, trial))
        solution, p_len, d_len = _solve_heuristic_inner(inst, stop_matrix(inst))
        k_samples.append(d_len / root)
        kplus_samples.append(solution.length / (p_len + d_len))
        integrated.append(solution.length)
        pickup_lens.append(p_len)
        dropoff_lens.append(d_len)
    lengths = np.array(integrated)
    quantile = float(np.mean(lengths <= rho * lengths.mean()))
    return ConstantsEstimate(
        k_hat=float(np.mean(k_samples)),
        kplus_hat=float(np.mean(kplus_samples)),
        rho_quantile=quantile,
        n_orders=n_orders,
        area=area,
        metric=Metric(metric),
        trials=trials,
        seed=seed,
        rho=rho,
        k_samples=tuple(k_samples),
        kplus_samples=tuple(kplus_samples),
        integrated_lengths=tuple(integrated),
        pickup_leg_lengths=tuple(pickup_lens),
        dropoff_leg_lengths=tuple(dropoff_lens),
    )
