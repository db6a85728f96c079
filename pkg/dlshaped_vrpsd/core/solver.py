"""
DL-shaped branch-and-cut engine.

The master problem carries edge variables x_e, fleet-choice variables z_m and
one recourse variable θ_i per customer (a single Θ in the classic baseline).
Cuts are generated lazily at every node; integer, cut-clean solutions update
the incumbent with their recomputed objective.
"""

import heapq
import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from ..utils import config
from ..utils.config import SolverOptions
from .cuts import (
    Cut,
    CutPool,
    SeparationState,
    build_initial_pool,
    callback_separate,
    classic_separate,
    extract_routes,
)
from .errors import InfeasibleInstanceError, SuperadditivityError, UnsupportedVariantError, VrpsdError
from .instance import Edge, Instance, VariantConfig, derive_variant, edge
from .lp import HighsLp, LpSubsystem
from .oracle import PropertyReport, check_superadditivity
from .recourse import Policy, RecourseCache
from .solution import RouteResult, Solution
from .warm_start import warm_start

logger = logging.getLogger(__name__)

VarKey = Tuple[str, object]


def _default_bounds(key: VarKey) -> Tuple[float, float]:
    kind, ident = key
    if kind == "x" and ident[0] == 0:
        return 0.0, 2.0
    return 0.0, 1.0


@dataclass
class SearchNode:
    """A branch-and-bound node: bound fixings on top of the root model."""
    fixings: Dict[VarKey, Tuple[float, float]] = field(default_factory=dict)
    bound: float = -math.inf
    depth: int = 0
    status: str = "open"

    def bounds_of(self, key: VarKey) -> Tuple[float, float]:
        return self.fixings.get(key, _default_bounds(key))

    def child(self, key: VarKey, lower: float, upper: float) -> "SearchNode":
        fixings = dict(self.fixings)
        fixings[key] = (lower, upper)
        return SearchNode(fixings=fixings, bound=self.bound, depth=self.depth + 1)


def _fractionality(value: float) -> float:
    return abs(value - round(value))


def branch(
    node: SearchNode,
    x: Mapping[Edge, float],
    z: Optional[Mapping[int, float]] = None,
    costs: Optional[Mapping[Edge, float]] = None,
    tol: float = config.INTEGRALITY_TOL,
) -> Tuple[SearchNode, SearchNode]:
    """Split on the most fractional x_e (ties: largest cost, then smallest edge).

    z_m is branched on only when every x_e is integral.
    """
    costs = costs or {}
    fractional = [(e, v) for e, v in x.items() if _fractionality(v) > tol]
    if fractional:
        e, value = min(fractional, key=lambda item: (-_fractionality(item[1]), -costs.get(item[0], 0.0), item[0]))
        key: VarKey = ("x", e)
    else:
        z_frac = [(m, v) for m, v in (z or {}).items() if _fractionality(v) > tol]
        if not z_frac:
            raise ValueError("Cannot branch on an integral solution")
        m, value = min(z_frac, key=lambda item: (-_fractionality(item[1]), item[0]))
        key = ("z", m)
    lower, upper = node.bounds_of(key)
    down = node.child(key, lower, float(math.floor(value)))
    up = node.child(key, float(math.ceil(value)), upper)
    logger.debug(f"Branching on {key} = {value:.6f} at depth {node.depth}")
    return down, up


def split_integral(node: SearchNode, x: Mapping[Edge, float], costs: Optional[Mapping[Edge, float]] = None) -> Tuple[SearchNode, SearchNode]:
    """Split the domain of one unfixed x_e at an integral point; the point stays in exactly one child.

    Prefers edges the point uses, then the largest cost, then the smallest edge.
    Raises ValueError once every x_e is fixed.
    """
    costs = costs or {}
    free = [(e, round(v)) for e, v in x.items() if node.bounds_of(("x", e))[0] < node.bounds_of(("x", e))[1]]
    if not free:
        raise ValueError("Every edge variable is already fixed")
    e, value = min(free, key=lambda item: (-(item[1] > 0), -costs.get(item[0], 0.0), item[0]))
    key: VarKey = ("x", e)
    lower, upper = node.bounds_of(key)
    if value + 1 <= upper:
        down, up = node.child(key, lower, float(value)), node.child(key, float(value + 1), upper)
    else:
        down, up = node.child(key, lower, float(value - 1)), node.child(key, float(value), upper)
    logger.debug(f"Splitting {key} around {value} at depth {node.depth}")
    return down, up


class MasterModel:
    """Master LP: degree, fleet-link and fleet-choice rows plus accumulated cuts."""

    def __init__(self, instance: Instance, classic: bool = False, lp: Optional[LpSubsystem] = None,
                 theta_floor: Optional[Mapping[int, float]] = None):
        self.instance = instance
        self.classic = classic
        self.lp = lp or HighsLp()
        self.x_index: Dict[Edge, int] = {}
        self.z_index: Dict[int, int] = {}
        self.theta_index: Dict[int, int] = {}
        self.costs: Dict[Edge, float] = {}

        nodes = range(instance.n + 1)
        for i, j in itertools.combinations(nodes, 2):
            e = (i, j)
            lower, upper = _default_bounds(("x", e))
            self.costs[e] = instance.cost(i, j)
            self.x_index[e] = self.lp.add_variable(f"x_{i}_{j}", lower, upper, self.costs[e])
        for m in instance.fleet:
            self.z_index[m] = self.lp.add_variable(f"z_{m}", 0.0, 1.0, 0.0)
        if classic:
            self.theta_index[0] = self.lp.add_variable("Theta", 0.0, None, 1.0)
        else:
            floor = theta_floor or {}
            for i in instance.customers:
                self.theta_index[i] = self.lp.add_variable(f"theta_{i}", floor.get(i, 0.0), None, 1.0)

        for i in instance.customers:
            row = {self.x_index[edge(i, j)]: 1.0 for j in nodes if j != i}
            self.lp.add_row(row, "==", 2.0)
        fleet_link = {self.x_index[(0, j)]: 1.0 for j in instance.customers}
        for m, k in self.z_index.items():
            fleet_link[k] = -2.0 * m
        self.lp.add_row(fleet_link, "==", 0.0)
        self.lp.add_row({k: 1.0 for k in self.z_index.values()}, "==", 1.0)

    def add_cut(self, cut: Cut) -> int:
        coefs: Dict[int, float] = {}
        for e, c in cut.x_coefs:
            coefs[self.x_index[e]] = coefs.get(self.x_index[e], 0.0) + c
        for i, c in cut.theta_coefs:
            coefs[self.theta_index[i]] = coefs.get(self.theta_index[i], 0.0) + c
        return self.lp.add_row(coefs, ">=", cut.rhs)

    def apply(self, node: SearchNode) -> None:
        for e, k in self.x_index.items():
            self.lp.set_bounds(k, *node.bounds_of(("x", e)))
        for m, k in self.z_index.items():
            self.lp.set_bounds(k, *node.bounds_of(("z", m)))

    def read(self, values: np.ndarray) -> Tuple[Dict[Edge, float], Dict[int, float], Dict[int, float]]:
        x = {e: float(values[k]) for e, k in self.x_index.items()}
        theta = {i: float(values[k]) for i, k in self.theta_index.items()}
        z = {m: float(values[k]) for m, k in self.z_index.items()}
        return x, theta, z


def superadditivity_gate(instance: Instance, policy: Policy, options: SolverOptions) -> Optional[PropertyReport]:
    """Brute-force superadditivity check requested through the options.

    Raises SuperadditivityError on a violation unless options.force is set.
    """
    depth = options.check_superadditivity_depth
    if depth is None:
        return None
    report = check_superadditivity(instance, policy, max_len=depth)
    if report.holds:
        logger.info(f"Superadditivity of {policy.value.upper()} holds on {instance.name} up to length {depth}")
        return report
    witness = report.witnesses[0]
    message = (
        f"{policy.value.upper()} recourse is not superadditive on {instance.name}: "
        f"Q{witness['p1'] + witness['p2']} = {witness['concatenation']:.6f} < "
        f"Q{witness['p1']} + Q{witness['p2']} = {witness['sum_of_parts']:.6f}"
    )
    if options.force:
        logger.warning(f"{message}; continuing because the check was overridden")
        return report
    raise SuperadditivityError(message, witness)


class BranchAndCut:
    """Best-first branch-and-cut over the master model."""

    def __init__(self, instance: Instance, policy: Policy, options: SolverOptions, classic: bool = False):
        self.instance = instance
        self.policy = policy
        self.options = options
        self.classic = classic
        self.cache = RecourseCache(instance, policy)
        self.state = SeparationState(
            instance=instance,
            policy=policy,
            cache=self.cache,
            e_cuts=options.e_cuts,
            s_cuts=options.s_cuts,
            cuts_per_type=options.cuts_per_type,
            exact_max_set=options.exact_bound_max_set,
        )
        floors = None if classic else {i: self.cache.value((i,)) for i in instance.customers}
        self.model = MasterModel(instance, classic=classic, theta_floor=floors)
        self.pool = CutPool()
        self.incumbent: Optional[Solution] = None
        self.nodes = 0
        self._counter = itertools.count()

    # -- incumbent ---------------------------------------------------------

    def _offer(self, solution: Solution, source: str) -> None:
        try:
            solution.check(self.instance)
        except VrpsdError as e:
            logger.debug(f"Rejected {source} candidate: {e}")
            return
        if self.incumbent is None or solution.objective < self.incumbent.objective - config.OBJECTIVE_TOL:
            self.incumbent = solution
            logger.info(f"New incumbent from {source}: {solution.objective:.6f}")

    def _incumbent_from(self, x: Mapping[Edge, float]) -> None:
        routes = extract_routes(self.instance, x)
        results = [RouteResult.build(self.instance, r, self.cache.evaluate(r)) for r in routes]
        candidate = Solution(
            instance_name=self.instance.name,
            policy=self.policy,
            routes=sorted(results, key=lambda r: r.path),
            status="feasible",
        )
        self._offer(candidate, f"node {self.nodes}")

    def _dominated(self, bound: float) -> bool:
        return self.incumbent is not None and bound >= self.incumbent.objective - config.OBJECTIVE_TOL

    # -- node processing ---------------------------------------------------

    def _separate(self, x, theta, integral: bool):
        if self.classic:
            return classic_separate(x, theta[0], integral, self.state)
        return callback_separate(x, theta, integral, self.state)

    def _add(self, found) -> int:
        added = 0
        for violation, cut in found:
            if self.pool.add(cut, violation, node=self.nodes):
                self.model.add_cut(cut)
                added += 1
        return added

    def _process(self, node: SearchNode) -> List[SearchNode]:
        self.model.apply(node)
        rounds = 0
        while True:
            result = self.model.lp.solve()
            if not result.optimal:
                node.status = "fathomed"
                return []
            node.bound = max(node.bound, result.objective)
            if self._dominated(node.bound):
                node.status = "fathomed"
                return []
            x, theta, z = self.model.read(result.x)
            x_integral = all(_fractionality(v) <= config.INTEGRALITY_TOL for v in x.values())
            found = self._separate(x, theta, x_integral)
            added = self._add(found)
            logger.debug(f"Node {self.nodes} round {rounds}: bound {node.bound:.6f}, {added} new cut(s)")
            if not added:
                break
            rounds += 1
            if not x_integral and rounds >= self.options.max_cut_rounds:
                break

        z_integral = all(_fractionality(v) <= config.INTEGRALITY_TOL for v in z.values())
        if x_integral and not found:
            self._incumbent_from(x)
            if z_integral or self._dominated(node.bound):
                node.status = "fathomed"
                return []
        if x_integral and z_integral:
            self._incumbent_from(x)
            try:
                children = split_integral(node, x, self.model.costs)
            except ValueError:
                logger.warning(f"Node {self.nodes}: fixed integral solution still violates pooled cuts; fathoming")
                node.status = "fathomed"
                return []
            logger.debug(f"Node {self.nodes}: integral solution violates pooled cuts; splitting")
            node.status = "branched"
            return list(children)
        node.status = "branched"
        return list(branch(node, x, z, self.model.costs))

    # -- main loop ---------------------------------------------------------

    def _push(self, heap, node: SearchNode) -> None:
        heapq.heappush(heap, (node.bound, -node.depth, next(self._counter), node))

    def run(self) -> Solution:
        started = time.monotonic()
        mode = "classic" if self.classic else "DL-shaped"
        logger.info(f"Solving {self.instance!r} with {mode} branch-and-cut, policy {self.policy.value.upper()}")

        if self.options.warm_start:
            try:
                self._offer(warm_start(self.instance, policy=self.policy, cache=self.cache), "warm start")
            except InfeasibleInstanceError as e:
                logger.warning(f"Warm start failed: {e}")
        if self.options.initial_pool and self.options.s_cuts and not self.classic:
            for cut in build_initial_pool(self.instance, self.policy, self.cache):
                if self.pool.add(cut):
                    self.model.add_cut(cut)

        heap: List = []
        self._push(heap, SearchNode())
        status = "optimal"
        while heap:
            elapsed = time.monotonic() - started
            if self.options.time_limit is not None and elapsed >= self.options.time_limit:
                logger.info(f"Time limit {self.options.time_limit}s reached after {self.nodes} node(s)")
                status = "limit"
                break
            if self.options.node_limit is not None and self.nodes >= self.options.node_limit:
                logger.info(f"Node limit {self.options.node_limit} reached")
                status = "limit"
                break
            _, _, _, node = heapq.heappop(heap)
            if self._dominated(node.bound):
                node.status = "fathomed"
                continue
            self.nodes += 1
            for child in self._process(node):
                self._push(heap, child)

        open_bounds = [entry[0] for entry in heap if not self._dominated(entry[0])]
        if self.options.cuts_log:
            self.pool.write_log(self.options.cuts_log)

        if self.incumbent is None:
            if status == "limit":
                return Solution(
                    instance_name=self.instance.name,
                    policy=self.policy,
                    routes=[],
                    status="limit",
                    bound=min(open_bounds, default=-math.inf),
                    nodes=self.nodes,
                    cuts=self.pool.counts(),
                    wall_time=time.monotonic() - started,
                    method=mode.lower(),
                    cut_log=list(self.pool.log),
                )
            raise InfeasibleInstanceError(f"No fleet size in {list(self.instance.fleet)} admits a feasible solution")

        if status == "limit" and open_bounds:
            bound = min(min(open_bounds), self.incumbent.objective)
        else:
            status = "optimal"
            bound = self.incumbent.objective
        solution = Solution(
            instance_name=self.instance.name,
            policy=self.policy,
            routes=self.incumbent.routes,
            status=status,
            bound=bound,
            nodes=self.nodes,
            cuts=self.pool.counts(),
            wall_time=time.monotonic() - started,
            method=mode.lower(),
            cut_log=list(self.pool.log),
        )
        logger.info(
            f"{mode} on {self.instance.name}: {status}, objective {solution.objective:.6f}, "
            f"{self.nodes} node(s), cuts {solution.cuts}, {solution.wall_time:.2f}s"
        )
        return solution


def solve(
    instance: Instance,
    variant: Optional[VariantConfig] = None,
    policy=Policy.OR,
    options: Optional[SolverOptions] = None,
) -> Solution:
    """Optimal solution of the instance under the given recourse policy."""
    options = options or SolverOptions()
    if variant is not None:
        instance = derive_variant(instance, variant)
    policy = Policy.parse(policy)
    if options.classic:
        return solve_classic_baseline(instance, policy, options)
    superadditivity_gate(instance, policy, options)
    return BranchAndCut(instance, policy, options).run()


def solve_classic_baseline(instance: Instance, policy=Policy.OR, options: Optional[SolverOptions] = None) -> Solution:
    """Integer L-shaped baseline with one aggregated recourse variable."""
    if len(instance.fleet) != 1:
        raise UnsupportedVariantError(
            f"The classic baseline needs a fixed fleet size, got M={list(instance.fleet)}"
        )
    options = options or SolverOptions()
    return BranchAndCut(instance, Policy.parse(policy), options, classic=True).run()
