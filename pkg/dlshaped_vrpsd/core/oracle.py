"""
Brute-force ground truth and property checkers.

Everything here enumerates explicitly and refuses inputs beyond its size
guards instead of degrading silently.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Any, Collection, Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from .demand import convolve_all
from .errors import InfeasibleInstanceError, OracleSizeError
from .instance import (
    Edge,
    Instance,
    Path,
    VariantConfig,
    derive_variant,
    edge,
    path_edges,
    path_is_feasible,
    validate_path,
)
from .recourse import Policy, RecourseCache
from .solution import RouteResult, Solution

logger = logging.getLogger(__name__)

INF = float("inf")
BRUTE_FORCE_MAX_N = 9
ENUMERATE_MAX_SET = 7
SUPERADDITIVITY_MAX_LEN = 8
MONOTONICITY_MAX_SET = 6
SUBSEQUENCE_MAX_LEN = 7
PROPERTY_TOL = 1e-9
MAX_WITNESSES = 10


@dataclass
class PropertyReport:
    """Outcome of a property check."""
    property: str
    policy: Optional[str]
    holds: bool = True
    checked: int = 0
    witnesses: List[Dict[str, Any]] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)

    def add_witness(self, witness: Dict[str, Any]) -> None:
        self.holds = False
        if len(self.witnesses) < MAX_WITNESSES:
            self.witnesses.append(witness)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "property": self.property,
            "policy": self.policy,
            "status": "holds" if self.holds else "violated",
            "holds": self.holds,
            "checked": self.checked,
            "witnesses": self.witnesses,
            "details": self.details,
        }


# ---------------------------------------------------------------------------
# Enumeration helpers
# ---------------------------------------------------------------------------

def set_partitions(items: Sequence[int], blocks: int) -> Iterator[List[Tuple[int, ...]]]:
    """All partitions of items into exactly `blocks` non-empty unordered blocks."""
    items = list(items)
    if blocks < 1 or blocks > len(items):
        return
    if blocks == 1:
        yield [tuple(items)]
        return
    if blocks == len(items):
        yield [(i,) for i in items]
        return
    first, rest = items[0], items[1:]
    # first alone in its block
    for partition in set_partitions(rest, blocks - 1):
        yield [(first,)] + partition
    # first joins one of the blocks of a partition of the rest
    for partition in set_partitions(rest, blocks):
        for k in range(len(partition)):
            yield partition[:k] + [(first,) + partition[k]] + partition[k + 1:]


def undirected_paths(block: Sequence[int], forbidden: FrozenSet[Edge] = frozenset()) -> Iterator[Path]:
    """Every Hamiltonian path over a block once per direction pair, avoiding forbidden edges."""
    block = sorted(block)
    if len(block) == 1:
        yield (block[0],)
        return
    for order in permutations(block):
        if order[0] > order[-1]:
            continue
        if forbidden and any(e in forbidden for e in path_edges(order)):
            continue
        yield order


def feasible_paths(instance: Instance, max_len: int) -> Iterator[Path]:
    """Feasible paths up to max_len customers, one orientation each."""
    for length in range(1, max_len + 1):
        for members in combinations(instance.customers, length):
            if not path_is_feasible(instance, members):
                continue
            yield from undirected_paths(members)


def proper_subsequences(path: Sequence[int]) -> Iterator[Path]:
    t = len(path)
    for length in range(1, t):
        for idx in combinations(range(t), length):
            yield tuple(path[k] for k in idx)


# ---------------------------------------------------------------------------
# Partition recourse and brute-force solve
# ---------------------------------------------------------------------------

def enumerate_L(
    instance: Instance,
    customers: Collection[int],
    vehicles: int,
    forbidden_edges: Iterable[Edge] = (),
    policy=Policy.OR,
    cache: Optional[RecourseCache] = None,
    count_vehicles: bool = True,
) -> Tuple[float, Optional[int]]:
    """Exact L(S, m) and m(S) by enumeration; forbidden edges are excluded from paths.

    L is +inf when S cannot be split into exactly m feasible allowed paths.
    """
    members = sorted(set(customers))
    if len(members) > ENUMERATE_MAX_SET:
        raise OracleSizeError(f"Partition enumeration supports at most {ENUMERATE_MAX_SET} customers, got {len(members)}")
    forbidden = frozenset(edge(*e) for e in forbidden_edges)
    cache = cache if cache is not None and cache.instance is instance else RecourseCache(instance, policy)
    block_best: Dict[Tuple[int, ...], float] = {}

    def best_path_recourse(block: Tuple[int, ...]) -> float:
        key = tuple(sorted(block))
        if key not in block_best:
            if not path_is_feasible(instance, key):
                block_best[key] = INF
            else:
                block_best[key] = min(
                    (cache.value(p) for p in undirected_paths(key, forbidden)), default=INF
                )
        return block_best[key]

    def partition_value(m: int) -> float:
        best = INF
        for partition in set_partitions(members, m):
            total = 0.0
            for block in partition:
                total += best_path_recourse(block)
                if total >= best:
                    break
            best = min(best, total)
        return best

    value = partition_value(vehicles)
    min_vehicles = None
    if count_vehicles:
        for m in range(1, len(members) + 1):
            if m == vehicles and math.isfinite(value) or math.isfinite(partition_value(m)):
                min_vehicles = m
                break
    return value, min_vehicles


def brute_force_solve(instance: Instance, variant: Optional[VariantConfig] = None, policy=Policy.OR):
    """Global optimum over every fleet size in M and every partition into routes."""
    if variant is not None:
        instance = derive_variant(instance, variant)
    if instance.n > BRUTE_FORCE_MAX_N:
        raise OracleSizeError(f"Brute force supports at most {BRUTE_FORCE_MAX_N} customers, got {instance.n}")
    policy = Policy.parse(policy)
    started = time.monotonic()
    cache = RecourseCache(instance, policy)
    block_best: Dict[Tuple[int, ...], Tuple[float, Optional[Path]]] = {}

    def best_route(block: Tuple[int, ...]) -> Tuple[float, Optional[Path]]:
        key = tuple(sorted(block))
        if key not in block_best:
            best: Tuple[float, Optional[Path]] = (INF, None)
            if path_is_feasible(instance, key):
                for p in undirected_paths(key):
                    total = instance.route_cost(p) + cache.value(p)
                    if total < best[0] - 1e-12:
                        best = (total, p)
            block_best[key] = best
        return block_best[key]

    best_total, best_routes, best_m = INF, None, None
    for m in instance.fleet:
        for partition in set_partitions(instance.customers, m):
            total = 0.0
            routes = []
            for block in partition:
                cost, path = best_route(block)
                total += cost
                if total >= best_total:
                    break
                routes.append(path)
            else:
                if total < best_total - 1e-12:
                    best_total, best_routes, best_m = total, routes, m
    if best_routes is None:
        raise InfeasibleInstanceError(f"No fleet size in {list(instance.fleet)} admits a feasible partition")

    results = [RouteResult.build(instance, p, cache.evaluate(p)) for p in best_routes]
    solution = Solution(
        instance_name=instance.name,
        policy=policy,
        routes=sorted(results, key=lambda r: r.path),
        status="optimal",
        bound=best_total,
        wall_time=time.monotonic() - started,
        method="brute-force",
    )
    logger.info(f"Brute force on {instance.name}: objective {solution.objective:.6f} with m={best_m}")
    return solution


# ---------------------------------------------------------------------------
# Property checkers
# ---------------------------------------------------------------------------

def check_superadditivity(instance: Instance, policy=Policy.OR, max_len: int = 6) -> PropertyReport:
    """Q(p1, p2) ≥ Q(p1) + Q(p2) over every feasible concatenation with |p1|+|p2| ≤ max_len."""
    if max_len > SUPERADDITIVITY_MAX_LEN:
        raise OracleSizeError(f"Superadditivity check supports concatenations of at most {SUPERADDITIVITY_MAX_LEN}")
    policy = Policy.parse(policy)
    cache = RecourseCache(instance, policy)
    report = PropertyReport(property="superadditivity", policy=policy.value, details={"max_len": max_len})
    for p in feasible_paths(instance, max_len):
        if len(p) < 2:
            continue
        whole = cache.value(p)
        for split in range(1, len(p)):
            p1, p2 = p[:split], p[split:]
            parts = cache.value(p1) + cache.value(p2)
            report.checked += 1
            if whole < parts - PROPERTY_TOL:
                report.add_witness({
                    "p1": list(p1), "p2": list(p2), "concatenation": whole, "sum_of_parts": parts,
                })
                if len(report.witnesses) == 1:
                    logger.info(f"Superadditivity fails for {list(p1)} + {list(p2)}: {whole:.6f} < {parts:.6f}")
    return report


def check_monotonicity(instance: Instance, max_set: int = 4) -> PropertyReport:
    """Failure-probability dominance on every feasible set up to max_set customers.

    For disjoint S̃, a, b: P[S̃+a ≤ lQ < S̃+a+b] ≥ P[S̃ ≤ lQ < S̃+b] for every l ≥ 1.
    """
    if max_set > MONOTONICITY_MAX_SET:
        raise OracleSizeError(f"Monotonicity check supports sets of at most {MONOTONICITY_MAX_SET}")
    Q = instance.capacity
    report = PropertyReport(property="monotonicity", policy=None, details={"max_set": max_set})
    sums: Dict[FrozenSet[int], Any] = {}

    def law(members: FrozenSet[int]):
        if members not in sums:
            sums[members] = convolve_all(instance.demand(i) for i in sorted(members))
        return sums[members]

    def cdf(members: FrozenSet[int], level: int) -> float:
        return law(members).cdf(level)

    for size in range(2, max_set + 1):
        for members in combinations(instance.customers, size):
            if not path_is_feasible(instance, members):
                continue
            for a, b in permutations(members, 2):
                base = frozenset(members) - {a, b}
                with_a = base | {a}
                with_b = base | {b}
                full = frozenset(members)
                horizon = law(full).max_demand
                for level in range(Q, horizon, Q):
                    lhs = cdf(with_a, level) - cdf(full, level)
                    rhs = cdf(base, level) - cdf(with_b, level)
                    report.checked += 1
                    if lhs < rhs - PROPERTY_TOL:
                        report.add_witness({
                            "base": sorted(base), "a": a, "b": b, "l": level // Q, "lhs": lhs, "rhs": rhs,
                        })
    if not report.holds:
        logger.info(f"Monotonicity fails on {instance.name}: {report.witnesses[0]}")
    return report


def check_path_subsequences(instance: Instance, policy, path: Sequence[int], report: Optional[PropertyReport] = None, cache: Optional[RecourseCache] = None) -> PropertyReport:
    """Q(p') ≤ Q(p) for every proper subsequence p' of one path."""
    policy = Policy.parse(policy)
    seq = validate_path(instance, path)
    cache = cache or RecourseCache(instance, policy)
    report = report or PropertyReport(property="subsequence", policy=policy.value, details={"path": list(seq)})
    whole = cache.value(seq)
    for sub in proper_subsequences(seq):
        value = cache.value(sub)
        report.checked += 1
        if value > whole + PROPERTY_TOL:
            report.add_witness({
                "path": list(seq), "subsequence": list(sub), "path_value": whole, "subsequence_value": value,
            })
    return report


def check_subsequence_monotonicity(instance: Instance, policy=Policy.DTD, max_len: int = 5) -> PropertyReport:
    """Q(p') ≤ Q(p) for every feasible path up to max_len and each of its subsequences."""
    if max_len > SUBSEQUENCE_MAX_LEN:
        raise OracleSizeError(f"Subsequence check supports paths of at most {SUBSEQUENCE_MAX_LEN}")
    policy = Policy.parse(policy)
    cache = RecourseCache(instance, policy)
    report = PropertyReport(property="subsequence", policy=policy.value, details={"max_len": max_len})
    for p in feasible_paths(instance, max_len):
        if len(p) > 1:
            check_path_subsequences(instance, policy, p, report=report, cache=cache)
    return report


def verify_telescoping_assignment(
    instance: Instance, policy, routes: Sequence[Sequence[int]]
) -> PropertyReport:
    """Assign θ by prefix increments along each route and test every subpath P-cut.

    Each route is first turned to its cheaper recourse direction.
    """
    policy = Policy.parse(policy)
    cache = RecourseCache(instance, policy)
    report = PropertyReport(property="telescoping", policy=policy.value)
    oriented: List[List[int]] = []
    theta: Dict[int, float] = {}
    for route in routes:
        seq = validate_path(instance, route)
        both = cache.evaluate(seq)
        if both.backward < both.forward - PROPERTY_TOL:
            seq = seq[::-1]
        oriented.append(list(seq))
        previous = 0.0
        for k in range(1, len(seq) + 1):
            current = cache.value(seq[:k])
            delta = current - previous
            theta[seq[k - 1]] = delta
            previous = current
            report.checked += 1
            if delta < -PROPERTY_TOL:
                report.add_witness({"route": list(seq), "customer": seq[k - 1], "increment": delta})
        for i in range(len(seq)):
            for j in range(i + 1, len(seq) + 1):
                sub = seq[i:j]
                assigned = sum(theta[c] for c in sub)
                required = cache.value(sub)
                report.checked += 1
                if assigned < required - PROPERTY_TOL:
                    report.add_witness({
                        "route": list(seq), "subpath": list(sub), "assigned": assigned, "recourse": required,
                    })
    report.details["routes"] = oriented
    report.details["theta"] = {str(k): v for k, v in sorted(theta.items())}
    return report
