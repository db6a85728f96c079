"""
Cuts of the DL-shaped master problem and their separation.

Every cut is stored in the normalized form

    Σ_i a_i θ_i + Σ_e b_e x_e ≥ rhs

where θ_0 stands for the aggregated recourse variable Θ of the classic baseline.
"""

import json
import logging
import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from pathlib import Path as FilePath
from typing import Collection, Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx

from ..utils import config
from .bounds import best_lower_bound, vehicles_needed
from .errors import InvalidPathError, UnsupportedVariantError
from .instance import Edge, Instance, Path, edge, edges_within, path_edges, path_is_feasible, validate_path
from .oracle import enumerate_L
from .recourse import Policy, RecourseCache

logger = logging.getLogger(__name__)

TRIVIAL_TOL = 1e-9
DEGREE_TOL = 1e-6


class CutKind(str, Enum):
    RCI = "RCI"
    P = "P"
    S = "S"
    E = "E"
    CLASSIC = "ClassicOpt"


@dataclass(frozen=True)
class Cut:
    """A linear inequality over x and θ with its provenance."""
    kind: CutKind
    customers: Tuple[int, ...]
    edges: Tuple[Edge, ...]
    x_coefs: Tuple[Tuple[Edge, float], ...]
    theta_coefs: Tuple[Tuple[int, float], ...]
    rhs: float
    coefficient: float = 0.0
    vehicles: int = 0
    path: Optional[Path] = None
    note: str = ""

    @property
    def key(self) -> Tuple:
        return (self.kind.value, self.customers, self.edges)

    @property
    def trivial(self) -> bool:
        """P/S/E cuts with a vanishing coefficient carry no information."""
        return self.kind in (CutKind.P, CutKind.S, CutKind.E) and self.coefficient <= TRIVIAL_TOL

    def lhs(self, x: Mapping[Edge, float], theta: Mapping[int, float]) -> float:
        return sum(c * x.get(e, 0.0) for e, c in self.x_coefs) + sum(
            c * theta.get(i, 0.0) for i, c in self.theta_coefs
        )

    def violation(self, x: Mapping[Edge, float], theta: Mapping[int, float]) -> float:
        return self.rhs - self.lhs(x, theta)

    def to_dict(self, violation: Optional[float] = None) -> Dict:
        entry = {
            "kind": self.kind.value,
            "S": list(self.customers),
            "edges": [list(e) for e in self.edges],
            "L": self.coefficient,
            "m": self.vehicles,
            "rhs": self.rhs,
        }
        if self.path is not None:
            entry["path"] = list(self.path)
        if violation is not None:
            entry["violation"] = violation
        if self.note:
            entry["note"] = self.note
        return entry

    def describe(self) -> str:
        """Human-readable form, e.g. Σθ ≥ 0.125(x_1_2 + x_2_3 - 2)."""
        if self.kind is CutKind.RCI:
            terms = " + ".join(f"x_{i}_{j}" for i, j in self.edges)
            return f"{terms} <= {-self.rhs:g}"
        if self.kind is CutKind.CLASSIC:
            return f"Theta >= {self.rhs:g} + ... ({len(self.edges)} edges)"
        terms = " + ".join(f"x_{i}_{j}" for i, j in self.edges)
        constant = self.rhs / self.coefficient if self.coefficient else 0.0
        sign = "+" if constant >= 0 else "-"
        return f"sum theta{list(self.customers)} >= {self.coefficient:g}({terms} {sign} {abs(constant):g})"


# ---------------------------------------------------------------------------
# Cut builders
# ---------------------------------------------------------------------------

def _theta_ones(customers: Sequence[int]) -> Tuple[Tuple[int, float], ...]:
    return tuple((i, 1.0) for i in customers)


def build_rci(instance: Instance, customers: Collection[int]) -> Cut:
    """Σ_{E(S)} x_e ≤ |S| - ⌈Σμ/(fQ)⌉."""
    members = tuple(sorted(customers))
    if not members:
        raise ValueError("Customer set is empty")
    inner = tuple(edges_within(members))
    k = instance.min_vehicles(members)
    return Cut(
        kind=CutKind.RCI,
        customers=members,
        edges=inner,
        x_coefs=tuple((e, -1.0) for e in inner),
        theta_coefs=(),
        rhs=-(len(members) - k),
        vehicles=k,
    )


def build_p_cut(instance: Instance, path: Sequence[int], recourse: Union[float, RecourseCache], note: str = "") -> Cut:
    """Σ_{N(p)} θ ≥ Q_p (p(x) - |p| + 2)."""
    seq = validate_path(instance, path)
    if not path_is_feasible(instance, seq):
        raise InvalidPathError(f"Path {list(seq)} exceeds the expected capacity")
    value = recourse.value(seq) if isinstance(recourse, RecourseCache) else float(recourse)
    traversed = tuple(path_edges(seq))
    return Cut(
        kind=CutKind.P,
        customers=tuple(sorted(seq)),
        edges=tuple(sorted(traversed)),
        x_coefs=tuple((e, -value) for e in traversed),
        theta_coefs=_theta_ones(sorted(seq)),
        rhs=value * (2 - len(seq)),
        coefficient=value,
        vehicles=1,
        path=seq,
        note=note,
    )


def _set_cut(kind: CutKind, customers, edge_set, vehicles: int, coefficient: float, note: str) -> Cut:
    members = tuple(sorted(customers))
    if not members:
        raise ValueError("Customer set is empty")
    if vehicles < 1:
        raise ValueError(f"Vehicle count must be at least 1, got {vehicles}")
    chosen = tuple(sorted(edge(*e) for e in edge_set))
    return Cut(
        kind=kind,
        customers=members,
        edges=chosen,
        x_coefs=tuple((e, -coefficient) for e in chosen),
        theta_coefs=_theta_ones(members),
        rhs=coefficient * (vehicles + 1 - len(members)),
        coefficient=coefficient,
        vehicles=vehicles,
        note=note,
    )


def build_s_cut(instance: Instance, customers: Collection[int], vehicles: int, coefficient: float, note: str = "") -> Cut:
    """Σ_S θ ≥ L_S (Σ_{E(S)} x - |S| + m_S + 1)."""
    return _set_cut(CutKind.S, customers, edges_within(customers), vehicles, coefficient, note)


def build_e_cut(
    instance: Instance,
    customers: Collection[int],
    edge_set: Collection[Edge],
    vehicles: int,
    coefficient: float,
    note: str = "",
) -> Cut:
    """Σ_S θ ≥ L_{E_S} (Σ_{E_S} x - |S| + m + 1)."""
    allowed = set(edges_within(customers))
    stray = [e for e in edge_set if edge(*e) not in allowed]
    if stray:
        raise ValueError(f"Edges {stray} are not inside the customer set")
    return _set_cut(CutKind.E, customers, edge_set, vehicles, coefficient, note)


def build_classic_cut(instance: Instance, x: Mapping[Edge, float], recourse: float, lower: float = 0.0) -> Cut:
    """Θ ≥ L + (Q(x^ν) - L)(Σ_{e∈E(N): x^ν_e=1} x_e - Σ_{E(N)} x^ν_e + 1)."""
    if len(instance.fleet) != 1:
        raise UnsupportedVariantError("The classic optimality cut needs a fixed fleet size (|M| = 1)")
    active = tuple(sorted(e for e, v in x.items() if e[0] != 0 and v > 0.5))
    slope = recourse - lower
    return Cut(
        kind=CutKind.CLASSIC,
        customers=tuple(instance.customers),
        edges=active,
        x_coefs=tuple((e, -slope) for e in active),
        theta_coefs=((0, 1.0),),
        rhs=lower - slope * (len(active) - 1),
        coefficient=recourse,
        vehicles=instance.fleet[0],
    )


def build_initial_pool(instance: Instance, policy=Policy.OR, cache: Optional[RecourseCache] = None) -> List[Cut]:
    """Non-trivial S-cuts with L_S = L(S, 1) for small sets (|S| ≤ 4 up to 32 customers, else ≤ 3)."""
    policy = Policy.parse(policy)
    cache = cache or RecourseCache(instance, policy)
    sizes = (2, 3, 4) if instance.n <= 32 else (2, 3)
    pool = []
    for size in sizes:
        for members in combinations(instance.customers, size):
            if not path_is_feasible(instance, members):
                continue
            value, _ = enumerate_L(instance, members, 1, (), policy, cache=cache, count_vehicles=False)
            if math.isfinite(value) and value > TRIVIAL_TOL:
                pool.append(build_s_cut(instance, members, 1, value, note="initial pool"))
    logger.info(f"Initial pool for {instance.name}: {len(pool)} S-cut(s)")
    return pool


# ---------------------------------------------------------------------------
# Support graph helpers
# ---------------------------------------------------------------------------

def support_graph(instance: Instance, x: Mapping[Edge, float], eps: float = config.SUPPORT_EPS) -> nx.Graph:
    """Customers joined by every customer edge with x_e above eps."""
    graph = nx.Graph()
    graph.add_nodes_from(instance.customers)
    for (i, j), value in x.items():
        if i != 0 and value > eps:
            graph.add_edge(i, j, weight=value)
    return graph


def inner_flow(x: Mapping[Edge, float], customers: Collection[int]) -> float:
    return sum(x.get(e, 0.0) for e in edges_within(customers))


def depot_flow(x: Mapping[Edge, float], customer: int) -> float:
    return x.get((0, customer), 0.0)


def check_degrees(instance: Instance, x: Mapping[Edge, float], tol: float = DEGREE_TOL) -> None:
    degree = {i: 0.0 for i in instance.customers}
    for (i, j), value in x.items():
        if i in degree:
            degree[i] += value
        if j in degree:
            degree[j] += value
    bad = {i: d for i, d in degree.items() if abs(d - 2.0) > tol}
    if bad:
        raise ValueError(f"Edge values violate the degree equations at customers {sorted(bad)}")


def extract_routes(instance: Instance, x: Mapping[Edge, float]) -> List[Path]:
    """Routes of an integer solution; each route starts at its smaller end.

    Components without a depot connection (subtours) are not routes and are skipped.
    """
    graph = support_graph(instance, x, eps=0.5)
    routes = []
    for component in nx.connected_components(graph):
        sub = graph.subgraph(component)
        ends = sorted(i for i in component if sub.degree(i) <= 1)
        if not ends:
            continue
        if not nx.is_tree(sub) or max(dict(sub.degree()).values(), default=0) > 2:
            continue
        order = tuple(nx.dfs_preorder_nodes(sub, source=ends[0]))
        routes.append(order)
    return sorted(routes)


def active_path(graph: nx.Graph, component: Collection[int]) -> Optional[Path]:
    """The simple path formed by the active edges of a component, if they form one."""
    sub = graph.subgraph(component)
    if len(component) < 2 or sub.number_of_edges() != len(component) - 1:
        return None
    if not nx.is_connected(sub) or max(d for _, d in sub.degree()) > 2:
        return None
    ends = sorted(i for i in component if sub.degree(i) == 1)
    return tuple(nx.dfs_preorder_nodes(sub, source=ends[0]))


# ---------------------------------------------------------------------------
# Separation
# ---------------------------------------------------------------------------

def separate_rci(
    instance: Instance, x: Mapping[Edge, float], tol: float = config.VIOLATION_TOL
) -> List[Tuple[Tuple[int, ...], float]]:
    """Customer sets whose rounded capacity inequality is violated, with the violation.

    Integer solutions: exact over support components. Fractional solutions:
    components plus greedy shrinking that drops the customer with the largest
    depot flow.
    """
    check_degrees(instance, x)
    graph = support_graph(instance, x)
    found: Dict[Tuple[int, ...], float] = {}

    def test(members: Collection[int]) -> None:
        key = tuple(sorted(members))
        if key in found:
            return
        violation = inner_flow(x, key) - (len(key) - instance.min_vehicles(key))
        if violation > tol:
            found[key] = violation

    for component in nx.connected_components(graph):
        members = set(component)
        test(members)
        while len(members) > 2:
            drop = max(sorted(members), key=lambda i: depot_flow(x, i))
            members.discard(drop)
            test(members)
    return sorted(found.items(), key=lambda item: (-item[1], item[0]))


def select_edge_set(instance: Instance, x: Mapping[Edge, float], customers: Collection[int], eps: float = config.SUPPORT_EPS) -> List[Edge]:
    """E_S(x): edges of E(S) whose preventive cost is at least that of the cheapest active edge."""
    inner = edges_within(customers)
    active = [e for e in inner if x.get(e, 0.0) > eps]
    if not active:
        raise ValueError(f"No active edge inside {sorted(customers)}")
    pivot = min(active, key=lambda e: (instance.preventive_cost(*e), e))
    threshold = instance.preventive_cost(*pivot)
    return [e for e in inner if instance.preventive_cost(*e) >= threshold]


@dataclass
class SeparationState:
    """Shared state of the separation routine across nodes of one solve."""
    instance: Instance
    policy: Policy
    cache: RecourseCache
    e_cuts: bool = True
    s_cuts: bool = True
    cuts_per_type: int = config.CUTS_PER_TYPE
    exact_max_set: int = config.EXACT_BOUND_MAX_SET
    tol: float = config.VIOLATION_TOL
    bound_memo: Dict[Tuple, float] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def bound(self, customers: Collection[int], vehicles: int, forbidden: FrozenSet[Edge] = frozenset()) -> float:
        key = (tuple(sorted(customers)), vehicles, tuple(sorted(forbidden)))
        with self._lock:
            if key in self.bound_memo:
                return self.bound_memo[key]
        value = best_lower_bound(
            self.instance, customers, vehicles, forbidden, self.policy,
            cache=self.cache, exact_max_set=self.exact_max_set,
        )
        with self._lock:
            self.bound_memo[key] = value
        return value


def _set_candidates(state: SeparationState, x, customers, note: str) -> List[Cut]:
    """S-cut and E-cut of one customer set (both only when enabled and non-trivial)."""
    instance = state.instance
    members = tuple(sorted(customers))
    if len(members) < 2:
        return []
    vehicles = min(vehicles_needed(instance, members), len(members))
    cuts = []
    if state.s_cuts:
        value = state.bound(members, vehicles)
        if value > TRIVIAL_TOL:
            cuts.append(build_s_cut(instance, members, vehicles, value, note=note))
    if state.e_cuts:
        try:
            chosen = select_edge_set(instance, x, members)
        except ValueError:
            chosen = None
        if chosen is not None:
            forbidden = frozenset(set(edges_within(members)) - set(chosen))
            if forbidden or not state.s_cuts:
                value = state.bound(members, vehicles, forbidden)
                if value > TRIVIAL_TOL:
                    cuts.append(build_e_cut(instance, members, chosen, vehicles, value, note=note))
    return cuts


def _keep_violated(cuts: List[Cut], x, theta, tol: float) -> List[Tuple[float, Cut]]:
    scored = []
    for cut in cuts:
        violation = cut.violation(x, theta)
        if violation > tol:
            scored.append((violation, cut))
    return scored


def _top_per_kind(scored: List[Tuple[float, Cut]], limit: Optional[int]) -> List[Tuple[float, Cut]]:
    by_kind: Dict[CutKind, Dict[Tuple, Tuple[float, Cut]]] = {}
    for violation, cut in scored:
        bucket = by_kind.setdefault(cut.kind, {})
        if cut.key not in bucket or bucket[cut.key][0] < violation:
            bucket[cut.key] = (violation, cut)
    kept = []
    for kind in CutKind:
        ranked = sorted(by_kind.get(kind, {}).values(), key=lambda item: (-item[0], item[1].key))
        kept.extend(ranked if limit is None else ranked[:limit])
    return kept


def callback_separate(
    x: Mapping[Edge, float],
    theta: Mapping[int, float],
    is_integer: bool,
    state: SeparationState,
) -> List[Tuple[float, Cut]]:
    """Violated cuts at a relaxation solution, most violated first within each kind.

    1. rounded capacity inequalities, plus the S- and E-cut of each violated set;
    2. fractional solutions: S- and E-cut of every support component, and the
       P-cut of a component whose active edges form a path;
    3. integer solutions without violated capacity cuts: P-, S- and E-cuts of
       every subpath of every route, keeping the most violated of each kind.
    """
    instance = state.instance
    scored: List[Tuple[float, Cut]] = []

    rci_sets = separate_rci(instance, x, state.tol)
    for members, violation in rci_sets:
        scored.append((violation, build_rci(instance, members)))
        if len(members) >= 2:
            scored.extend(_keep_violated(_set_candidates(state, x, members, "capacity set"), x, theta, state.tol))

    if not is_integer:
        graph = support_graph(instance, x)
        seen = {members for members, _ in rci_sets}
        for component in nx.connected_components(graph):
            members = tuple(sorted(component))
            if len(members) < 2:
                continue
            candidates = [] if members in seen else _set_candidates(state, x, members, "component")
            path = active_path(graph, members)
            if path is not None and path_is_feasible(instance, path):
                candidates.append(build_p_cut(instance, path, state.cache, note="component path"))
            scored.extend(_keep_violated([c for c in candidates if not c.trivial], x, theta, state.tol))
        return _top_per_kind(scored, None)

    if rci_sets:
        return _top_per_kind(scored, None)

    candidates: List[Cut] = []
    for route in extract_routes(instance, x):
        for i in range(len(route)):
            for j in range(i + 1, len(route) + 1):
                sub = route[i:j]
                candidates.append(build_p_cut(instance, sub, state.cache, note="subpath"))
                if len(sub) >= 2:
                    candidates.extend(_set_candidates(state, x, sub, "subpath"))
    scored.extend(_keep_violated([c for c in candidates if not c.trivial], x, theta, state.tol))
    return _top_per_kind(scored, state.cuts_per_type)


def classic_separate(
    x: Mapping[Edge, float],
    aggregate: float,
    is_integer: bool,
    state: SeparationState,
) -> List[Tuple[float, Cut]]:
    """Capacity cuts everywhere; a classic optimality cut at integer capacity-clean solutions."""
    instance = state.instance
    scored = [(v, build_rci(instance, members)) for members, v in separate_rci(instance, x, state.tol)]
    if scored or not is_integer:
        return scored
    recourse = sum(state.cache.value(route) for route in extract_routes(instance, x))
    cut = build_classic_cut(instance, x, recourse)
    violation = cut.violation(x, {0: aggregate})
    if violation > state.tol:
        scored.append((violation, cut))
    return scored


# ---------------------------------------------------------------------------
# Cut pool
# ---------------------------------------------------------------------------

class CutPool:
    """Global cut pool with duplicate suppression and an audit trail."""

    def __init__(self):
        self.cuts: List[Cut] = []
        self._keys = set()
        self._lock = threading.Lock()
        self.log: List[Dict] = []

    def add(self, cut: Cut, violation: Optional[float] = None, node: Optional[int] = None) -> bool:
        with self._lock:
            if cut.key in self._keys:
                return False
            self._keys.add(cut.key)
            self.cuts.append(cut)
            entry = cut.to_dict(violation)
            if node is not None:
                entry["node"] = node
            self.log.append(entry)
        return True

    def __len__(self) -> int:
        return len(self.cuts)

    def __iter__(self):
        return iter(list(self.cuts))

    def counts(self) -> Dict[str, int]:
        totals = {kind.value: 0 for kind in CutKind}
        for cut in self.cuts:
            totals[cut.kind.value] += 1
        return totals

    def of_kind(self, kind: CutKind) -> List[Cut]:
        return [c for c in self.cuts if c.kind is kind]

    def write_log(self, path: Union[str, FilePath]) -> None:
        FilePath(path).write_text(json.dumps(self.log, indent=2))
        logger.info(f"Wrote {len(self.log)} cut(s) to {path}")
