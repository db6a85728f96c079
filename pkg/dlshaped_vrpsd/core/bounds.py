"""
Lower bounds on the smallest recourse of partitioning a customer set into m paths.

Both bounds split the expected demand of the set into equal groups of μ̄ units
(the GCD of the means) and distribute the groups over the vehicles with a
small dynamic program. They differ in the single-vehicle cost function:

* the general bound charges ρ(d)·c^R_(k), the probability of at least one
  recourse action times the cheapest action available to vehicle k;
* the Poisson bound runs the restocking recursion on Poisson(μ̄) sub-customers
  with the cheapest failure and preventive costs of vehicle k.

Both are valid for the DTD policy too, since OR recourse never exceeds DTD recourse.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache, reduce
from itertools import combinations
from typing import Collection, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..utils import config
from .demand import convolve, exceed_probability, make_deterministic, make_poisson
from .errors import BoundNotApplicableError
from .instance import FEASIBILITY_TOL, Edge, Instance, edge
from .recourse import Policy, RecourseCache, _transitions

logger = logging.getLogger(__name__)

INF = float("inf")
MAX_GRID_SCALE = 1000


@dataclass(frozen=True)
class DemandGrid:
    """Expected demand of a set expressed in groups of μ̄ units."""
    mu_bar: float
    total: float
    groups: int
    groups_per_vehicle: int


@dataclass(frozen=True)
class VehicleCostFloor:
    """Cheapest recourse actions accessible to each vehicle under the greedy ordering."""
    order: Tuple[int, ...]
    failure: Tuple[float, ...]
    preventive: Tuple[float, ...]

    @property
    def recourse(self) -> Tuple[float, ...]:
        return tuple(min(f, p) for f, p in zip(self.failure, self.preventive))


def scaled_gcd(values: Iterable[float]) -> float:
    """GCD of reals after scaling by the smallest power of ten that makes them integral."""
    values = [float(v) for v in values]
    if values and all(abs(v - values[0]) <= 1e-12 * max(1.0, abs(values[0])) for v in values):
        return values[0]
    scale = 1
    while scale <= MAX_GRID_SCALE:
        scaled = [v * scale for v in values]
        if all(abs(s - round(s)) <= 1e-9 * max(1.0, abs(s)) for s in scaled):
            common = reduce(math.gcd, (int(round(s)) for s in scaled))
            if common > 0:
                return common / scale
        scale *= 10
    return 1.0 / MAX_GRID_SCALE


def demand_grid(instance: Instance, customers: Collection[int]) -> DemandGrid:
    mu_bar = scaled_gcd(instance.demand(i).mean for i in customers)
    total = instance.set_mean(customers)
    groups = int(round(total / mu_bar))
    per_vehicle = int(math.floor(instance.route_limit / mu_bar + FEASIBILITY_TOL))
    return DemandGrid(mu_bar=mu_bar, total=total, groups=groups, groups_per_vehicle=per_vehicle)


def vehicles_needed(instance: Instance, customers: Collection[int]) -> int:
    """⌈Σ_{i∈S} μ_i / (⌊fQ/μ̄⌋ μ̄)⌉, a lower bound on the paths needed to cover S."""
    grid = demand_grid(instance, customers)
    per_vehicle = grid.groups_per_vehicle * grid.mu_bar
    if per_vehicle <= 0:
        return len(customers)
    return max(1, math.ceil(grid.total / per_vehicle - FEASIBILITY_TOL))


def _cheapest_failure(instance: Instance, customers: Collection[int]) -> float:
    return min(instance.failure_cost(i) for i in customers)


def _cheapest_preventive(
    instance: Instance, customers: Collection[int], forbidden: FrozenSet[Edge]
) -> float:
    costs = [
        instance.preventive_cost(i, j)
        for i, j in combinations(sorted(customers), 2)
        if edge(i, j) not in forbidden
    ]
    return min(costs) if costs else INF


def greedy_vehicle_order(
    instance: Instance,
    customers: Collection[int],
    vehicles: int,
    forbidden_edges: Iterable[Edge] = (),
) -> VehicleCostFloor:
    """Greedy customer ordering maximizing the recourse floor of each next vehicle."""
    members = sorted(set(customers))
    if vehicles < 1 or vehicles > len(members):
        raise ValueError(f"Vehicle count {vehicles} must lie in 1..{len(members)}")
    forbidden = frozenset(edge(*e) for e in forbidden_edges)

    remaining = set(members)
    failure = [_cheapest_failure(instance, remaining)]
    preventive = [_cheapest_preventive(instance, remaining, forbidden)]
    order: List[int] = []
    for _ in range(vehicles - 1):
        best_key = None
        best_candidate = None
        for candidate in sorted(remaining):
            rest = remaining - {candidate}
            floor = min(_cheapest_failure(instance, rest), _cheapest_preventive(instance, rest, forbidden))
            key = (-floor, instance.failure_cost(candidate), candidate)
            if best_key is None or key < best_key:
                best_key, best_candidate = key, candidate
        order.append(best_candidate)
        remaining.discard(best_candidate)
        failure.append(_cheapest_failure(instance, remaining))
        preventive.append(_cheapest_preventive(instance, remaining, forbidden))
    return VehicleCostFloor(order=tuple(order), failure=tuple(failure), preventive=tuple(preventive))


def recourse_need_probability(instance: Instance, customers: Collection[int], count: int) -> float:
    """P[Σ_{k≤count} ξ > Q] for the common demand law of an i.i.d. set."""
    members = sorted(customers)
    if not instance.is_iid(members):
        raise BoundNotApplicableError("Recourse-need probabilities require identically distributed demands")
    if count <= 0:
        return 0.0
    return float(_need_probabilities(instance, members[0], count)[count])


def _need_probabilities(instance: Instance, representative: int, up_to: int) -> np.ndarray:
    law = instance.demand(representative)
    total = make_deterministic(0)
    probs = [0.0]
    for _ in range(up_to):
        total = convolve(total, law)
        probs.append(exceed_probability(total, instance.capacity))
    return np.array(probs)


def partition_dp(costs: np.ndarray, groups: int, per_vehicle: int) -> float:
    """min Σ_k g_k(y_k) s.t. Σ y_k = groups, 0 ≤ y_k ≤ per_vehicle.

    costs[k, y] is the cost of vehicle k+1 carrying y groups.
    """
    vehicles = costs.shape[0]
    if groups > vehicles * per_vehicle:
        return INF
    best = np.full(groups + 1, INF)
    reach = min(groups, per_vehicle)
    best[: reach + 1] = costs[0, : reach + 1]
    for k in range(1, vehicles):
        nxt = np.full(groups + 1, INF)
        for d in range(groups + 1):
            y = np.arange(min(d, per_vehicle) + 1)
            nxt[d] = np.min(costs[k, y] + best[d - y])
        best = nxt
    return float(best[groups])


def _floors(instance, customers, vehicles, forbidden_edges) -> Tuple[List[int], VehicleCostFloor, DemandGrid]:
    members = sorted(set(customers))
    if not members:
        raise ValueError("Customer set is empty")
    floor = greedy_vehicle_order(instance, members, min(vehicles, len(members)), forbidden_edges)
    return members, floor, demand_grid(instance, members)


def lower_bound_L1(
    instance: Instance,
    customers: Collection[int],
    vehicles: int,
    forbidden_edges: Iterable[Edge] = (),
) -> float:
    """General bound for identically distributed demands."""
    members = sorted(set(customers))
    if not instance.is_iid(members):
        raise BoundNotApplicableError("The general bound requires identically distributed demands")
    members, floor, grid = _floors(instance, members, vehicles, forbidden_edges)
    if grid.groups > vehicles * grid.groups_per_vehicle:
        return INF
    need = _need_probabilities(instance, members[0], grid.groups_per_vehicle)
    rates = floor.recourse
    costs = np.array([need * rates[min(k, len(rates) - 1)] for k in range(vehicles)])
    return partition_dp(costs, grid.groups, grid.groups_per_vehicle)


@lru_cache(maxsize=4096)
def _poisson_vehicle_costs(
    mu_bar: float, capacity: int, failure: float, preventive: float, per_vehicle: int
) -> np.ndarray:
    """g̃(d) for d = 0..per_vehicle Poisson(μ̄) sub-customers served from full capacity."""
    law = make_poisson(mu_bar)
    psi, residual = _transitions(capacity, law.pmf.size - 1)
    values = np.zeros(per_vehicle + 1)
    onward = np.zeros(capacity + 1)
    for d in range(1, per_vehicle + 1):
        proceed = law.pmf @ (failure * psi + onward[residual])
        onward = np.minimum(proceed, preventive + proceed[capacity])
        values[d] = onward[capacity]
    values.setflags(write=False)
    return values


def lower_bound_L2(
    instance: Instance,
    customers: Collection[int],
    vehicles: int,
    forbidden_edges: Iterable[Edge] = (),
) -> float:
    """Poisson bound: restocking recursion on Poisson(μ̄) sub-customers."""
    members = sorted(set(customers))
    if not instance.is_poisson(members):
        raise BoundNotApplicableError("The Poisson bound requires Poisson demands")
    members, floor, grid = _floors(instance, members, vehicles, forbidden_edges)
    if grid.groups > vehicles * grid.groups_per_vehicle:
        return INF
    rows = []
    for k in range(vehicles):
        idx = min(k, len(floor.failure) - 1)
        rows.append(
            _poisson_vehicle_costs(
                grid.mu_bar, instance.capacity, floor.failure[idx], floor.preventive[idx], grid.groups_per_vehicle
            )
        )
    return partition_dp(np.array(rows), grid.groups, grid.groups_per_vehicle)


def best_lower_bound(
    instance: Instance,
    customers: Collection[int],
    vehicles: int,
    forbidden_edges: Iterable[Edge] = (),
    policy=Policy.OR,
    cache: Optional[RecourseCache] = None,
    exact_max_set: Optional[int] = None,
) -> float:
    """Largest applicable bound on L(S, m), or on its edge-restricted variant.

    Returns 0 when no finite bound is available.
    """
    from .oracle import enumerate_L

    exact_max_set = config.EXACT_BOUND_MAX_SET if exact_max_set is None else exact_max_set
    members = sorted(set(customers))
    forbidden = frozenset(edge(*e) for e in forbidden_edges)
    candidates = [0.0]
    if instance.is_iid(members):
        candidates.append(lower_bound_L1(instance, members, vehicles, forbidden))
    if instance.is_poisson(members):
        candidates.append(lower_bound_L2(instance, members, vehicles, forbidden))
    if len(members) <= exact_max_set:
        value, _ = enumerate_L(instance, members, vehicles, forbidden, policy, cache=cache, count_vehicles=False)
        candidates.append(value)
    finite = [c for c in candidates if math.isfinite(c)]
    return max(finite)
