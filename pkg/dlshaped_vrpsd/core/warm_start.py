"""
Recourse-aware construction heuristic giving the search its first incumbent.

Nearest-neighbor construction under the expected-capacity limit, a fleet-size
repair to land in M, then 2-opt inside routes and best-improvement relocation
across routes, all scored with first-stage cost plus recourse.
"""

import logging
import time
from typing import List, Optional

from .errors import InfeasibleInstanceError
from .instance import FEASIBILITY_TOL, Instance, Path, VariantConfig, derive_variant, path_is_feasible
from .recourse import Policy, RecourseCache
from .solution import RouteResult, Solution

logger = logging.getLogger(__name__)

IMPROVEMENT_TOL = 1e-9
MAX_PASSES = 200


def _route_total(instance: Instance, cache: RecourseCache, route: Path) -> float:
    return instance.route_cost(route) + cache.value(route)


def nearest_neighbor(instance: Instance) -> List[Path]:
    """Routes built by always driving to the closest customer that still fits."""
    unvisited = set(instance.customers)
    routes = []
    while unvisited:
        route, load, here = [], 0.0, 0
        while True:
            fits = [
                i for i in unvisited
                if load + instance.demand(i).mean <= instance.route_limit + FEASIBILITY_TOL
            ]
            if not fits:
                break
            nxt = min(fits, key=lambda i: (instance.cost(here, i), i))
            route.append(nxt)
            load += instance.demand(nxt).mean
            unvisited.discard(nxt)
            here = nxt
        routes.append(tuple(route))
    return routes


def _first_fit_decreasing(instance: Instance, bins: int) -> Optional[List[Path]]:
    order = sorted(instance.customers, key=lambda i: (-instance.demand(i).mean, i))
    packed = [[] for _ in range(bins)]
    loads = [0.0] * bins
    for i in order:
        mean = instance.demand(i).mean
        for k in range(bins):
            if loads[k] + mean <= instance.route_limit + FEASIBILITY_TOL:
                packed[k].append(i)
                loads[k] += mean
                break
        else:
            return None
    if any(not b for b in packed):
        return None
    return [tuple(b) for b in packed]


def _split(instance: Instance, cache: RecourseCache, routes: List[Path]) -> List[Path]:
    best = None
    for k, route in enumerate(routes):
        for cut in range(1, len(route)):
            head, tail = route[:cut], route[cut:]
            delta = (
                _route_total(instance, cache, head) + _route_total(instance, cache, tail)
                - _route_total(instance, cache, route)
            )
            if best is None or delta < best[0]:
                best = (delta, k, head, tail)
    if best is None:
        raise InfeasibleInstanceError("Cannot split routes further")
    _, k, head, tail = best
    return routes[:k] + [head, tail] + routes[k + 1:]


def _merge(instance: Instance, cache: RecourseCache, routes: List[Path]) -> Optional[List[Path]]:
    best = None
    for a in range(len(routes)):
        for b in range(a + 1, len(routes)):
            for left in (routes[a], routes[a][::-1]):
                for right in (routes[b], routes[b][::-1]):
                    joined = left + right
                    if not path_is_feasible(instance, joined):
                        continue
                    delta = (
                        _route_total(instance, cache, joined)
                        - _route_total(instance, cache, routes[a]) - _route_total(instance, cache, routes[b])
                    )
                    if best is None or delta < best[0]:
                        best = (delta, a, b, joined)
    if best is None:
        return None
    _, a, b, joined = best
    return [r for k, r in enumerate(routes) if k not in (a, b)] + [joined]


def repair_fleet(instance: Instance, cache: RecourseCache, routes: List[Path]) -> List[Path]:
    """Split or merge routes until their number lies in M."""
    larger = [m for m in instance.fleet if m >= len(routes)]
    target = larger[0] if larger else instance.fleet[-1]
    while len(routes) < target:
        routes = _split(instance, cache, routes)
    while len(routes) > target:
        merged = _merge(instance, cache, routes)
        if merged is None:
            packed = _first_fit_decreasing(instance, target)
            if packed is None:
                raise InfeasibleInstanceError(
                    f"Could not pack {instance.n} customers into {target} routes within fQ={instance.route_limit:g}"
                )
            logger.debug(f"Merging stalled, packed customers into {target} routes first-fit")
            return packed
        routes = merged
    return routes


def two_opt(instance: Instance, cache: RecourseCache, route: Path) -> Path:
    """Segment reversals inside one route until none improves it."""
    best, best_value = route, _route_total(instance, cache, route)
    improved = True
    while improved:
        improved = False
        for i in range(len(best) - 1):
            for j in range(i + 1, len(best)):
                candidate = best[:i] + best[i:j + 1][::-1] + best[j + 1:]
                value = _route_total(instance, cache, candidate)
                if value < best_value - IMPROVEMENT_TOL:
                    best, best_value, improved = candidate, value, True
    return best


def relocate(instance: Instance, cache: RecourseCache, routes: List[Path]) -> Optional[List[Path]]:
    """Best single-customer move to another route, or None when nothing improves."""
    best = None
    totals = [_route_total(instance, cache, r) for r in routes]
    for a, source in enumerate(routes):
        if len(source) < 2:
            continue
        for pos, customer in enumerate(source):
            shrunk = source[:pos] + source[pos + 1:]
            saving = totals[a] - _route_total(instance, cache, shrunk)
            for b, target in enumerate(routes):
                if b == a or not path_is_feasible(instance, target + (customer,)):
                    continue
                for slot in range(len(target) + 1):
                    grown = target[:slot] + (customer,) + target[slot:]
                    delta = _route_total(instance, cache, grown) - totals[b] - saving
                    if delta < -IMPROVEMENT_TOL and (best is None or delta < best[0]):
                        best = (delta, a, b, shrunk, grown)
    if best is None:
        return None
    _, a, b, shrunk, grown = best
    moved = list(routes)
    moved[a], moved[b] = shrunk, grown
    return moved


def warm_start(
    instance: Instance,
    variant: Optional[VariantConfig] = None,
    policy=Policy.OR,
    cache: Optional[RecourseCache] = None,
) -> Solution:
    """Feasible solution from construction plus local search."""
    started = time.monotonic()
    if variant is not None:
        instance = derive_variant(instance, variant)
    policy = Policy.parse(policy)
    cache = cache if cache is not None and cache.instance is instance else RecourseCache(instance, policy)

    routes = repair_fleet(instance, cache, nearest_neighbor(instance))
    for _ in range(MAX_PASSES):
        routes = [two_opt(instance, cache, r) for r in routes]
        moved = relocate(instance, cache, routes)
        if moved is None:
            break
        routes = moved

    results = sorted((RouteResult.build(instance, r, cache.evaluate(r)) for r in routes), key=lambda r: r.path)
    solution = Solution(
        instance_name=instance.name,
        policy=policy,
        routes=results,
        status="feasible",
        wall_time=time.monotonic() - started,
        method="warm-start",
    )
    logger.info(f"Warm start on {instance.name}: objective {solution.objective:.6f} with {len(routes)} route(s)")
    return solution
