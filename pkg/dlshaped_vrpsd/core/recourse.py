"""
Expected recourse of a priori routes.

Two policies are supported:

* OR (optimal restocking): after each customer the vehicle may return to the
  depot preventively; decisions follow the Bellman-optimal cost-to-go.
* DTD (detour-to-depot): the vehicle only returns to the depot on a failure.

A path is evaluated in both orientations and the cheaper one is kept.
"""

import logging
import math
import threading
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from ..utils import config
from .demand import PartialSumTable
from .errors import InvalidPathError, OracleSizeError
from .instance import Instance, Path, canonical_orientation, validate_path

logger = logging.getLogger(__name__)

TIE_TOL = 1e-12
EXHAUSTIVE_MAX_LEN = 6
EXHAUSTIVE_MAX_HISTORIES = 10 ** 6


class Policy(str, Enum):
    OR = "or"
    DTD = "dtd"

    @classmethod
    def parse(cls, value) -> "Policy":
        if isinstance(value, Policy):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"Unknown recourse policy {value!r}, expected 'or' or 'dtd'") from None


@dataclass(frozen=True, eq=False)
class OrProfile:
    """Cost-to-go and restock tables of one oriented path.

    Row j describes the state after the first j customers were served (row 0 is
    the depot); column q is the residual capacity.
    """
    path: Path
    cost_to_go: np.ndarray
    restock: np.ndarray
    capacity: int

    @property
    def value(self) -> float:
        return float(self.cost_to_go[0, self.capacity])

    def is_monotone(self, tol: float = 1e-9) -> bool:
        """Cost-to-go never increases with residual capacity."""
        return bool(np.all(np.diff(self.cost_to_go, axis=1) <= tol))

    def restock_thresholds(self) -> Dict[int, Optional[int]]:
        """Largest residual capacity at which a preventive return is taken after each customer."""
        summary = {}
        for j in range(1, len(self.path)):
            levels = np.flatnonzero(self.restock[j])
            summary[self.path[j - 1]] = int(levels.max()) if levels.size else None
        return summary


@dataclass(frozen=True)
class RecourseValue:
    """Recourse of a path in both orientations."""
    path: Path
    policy: Policy
    forward: float
    backward: float

    @property
    def value(self) -> float:
        return min(self.forward, self.backward)

    @property
    def orientation(self) -> str:
        return "forward" if self.forward <= self.backward else "backward"

    @property
    def best_path(self) -> Path:
        return self.path if self.orientation == "forward" else self.path[::-1]

    def reversed(self) -> "RecourseValue":
        return RecourseValue(self.path[::-1], self.policy, self.backward, self.forward)

    def to_dict(self) -> Dict:
        return {
            "path": list(self.path),
            "policy": self.policy.value,
            "forward": self.forward,
            "backward": self.backward,
            "value": self.value,
            "orientation": self.orientation,
        }


@dataclass(frozen=True)
class SimulationResult:
    mean: float
    stderr: float
    samples: int
    seed: int


@lru_cache(maxsize=256)
def _transitions(capacity: int, max_demand: int) -> Tuple[np.ndarray, np.ndarray]:
    """Ψ(s, q) = ⌈(s - q)/Q⌉⁺ and the resulting residual ΨQ + q - s, indexed [s, q]."""
    s = np.arange(max_demand + 1)[:, None]
    q = np.arange(capacity + 1)[None, :]
    excess = np.maximum(s - q, 0)
    psi = -(-excess // capacity)
    residual = psi * capacity + q - s
    psi.setflags(write=False)
    residual.setflags(write=False)
    return psi, residual


def _proceed_cost(
    instance: Instance, customer: int, next_cost: np.ndarray
) -> np.ndarray:
    """H(q): expected cost of driving to the customer with residual q, for every q."""
    pmf = instance.demand(customer).pmf
    psi, residual = _transitions(instance.capacity, pmf.size - 1)
    per_outcome = instance.failure_cost(customer) * psi + next_cost[residual]
    return pmf @ per_outcome


def _cost_to_go(instance: Instance, path: Path, preventive: bool) -> OrProfile:
    t = len(path)
    Q = instance.capacity
    table = np.zeros((t, Q + 1))
    restock = np.zeros((t, Q + 1), dtype=bool)
    next_cost = np.zeros(Q + 1)
    for j in range(t - 1, -1, -1):
        proceed = _proceed_cost(instance, path[j], next_cost)
        row = proceed
        if preventive and j >= 1:
            restock_cost = instance.preventive_cost(path[j - 1], path[j]) + proceed[Q]
            take = restock_cost < proceed - TIE_TOL
            row = np.where(take, restock_cost, proceed)
            restock[j] = take
        table[j] = row
        next_cost = row
    table.setflags(write=False)
    restock.setflags(write=False)
    return OrProfile(path=path, cost_to_go=table, restock=restock, capacity=Q)


def or_cost_to_go(instance: Instance, path: Sequence[int]) -> OrProfile:
    """Bellman cost-to-go of the OR policy along one orientation of a path."""
    seq = validate_path(instance, path)
    profile = _cost_to_go(instance, seq, preventive=True)
    logger.debug(f"OR cost-to-go of {list(seq)}: {profile.value:.6f}")
    return profile


def or_recourse(instance: Instance, path: Sequence[int]) -> RecourseValue:
    seq = validate_path(instance, path)
    forward = or_cost_to_go(instance, seq).value
    backward = forward if len(seq) == 1 else or_cost_to_go(instance, seq[::-1]).value
    return RecourseValue(seq, Policy.OR, forward, backward)


def dtd_value(instance: Instance, path: Sequence[int], tail_eps: Optional[float] = None) -> float:
    """DTD recourse of one orientation from the prefix-sum laws.

    Σ_j Σ_{l≥1} P[S_{j-1} ≤ lQ < S_j] c^F_j, where S_j is the demand of the first j customers.
    """
    seq = validate_path(instance, path)
    Q = instance.capacity
    table = PartialSumTable([instance.demand(i) for i in seq], tail_eps)
    horizon = table[len(seq)].max_demand
    if horizon <= Q:
        return 0.0
    levels = np.arange(Q, horizon, Q)
    cdfs = []
    for row in table.rows:
        cum = np.minimum(np.cumsum(row.pmf), 1.0)
        cdfs.append(np.where(levels < cum.size, cum[np.minimum(levels, cum.size - 1)], 1.0))
    total = 0.0
    for j, customer in enumerate(seq, start=1):
        crossing = np.clip(cdfs[j - 1] - cdfs[j], 0.0, None).sum()
        total += crossing * instance.failure_cost(customer)
    return float(total)


def dtd_recourse(instance: Instance, path: Sequence[int]) -> RecourseValue:
    seq = validate_path(instance, path)
    forward = dtd_value(instance, seq)
    backward = forward if len(seq) == 1 else dtd_value(instance, seq[::-1])
    return RecourseValue(seq, Policy.DTD, forward, backward)


def dtd_via_bellman(instance: Instance, path: Sequence[int]) -> RecourseValue:
    """DTD recourse computed by the OR recursion with preventive returns disabled."""
    seq = validate_path(instance, path)
    forward = _cost_to_go(instance, seq, preventive=False).value
    backward = forward if len(seq) == 1 else _cost_to_go(instance, seq[::-1], preventive=False).value
    return RecourseValue(seq, Policy.DTD, forward, backward)


def evaluate(instance: Instance, path: Sequence[int], policy) -> RecourseValue:
    """Recourse of a path under the given policy."""
    if Policy.parse(policy) is Policy.OR:
        return or_recourse(instance, path)
    return dtd_recourse(instance, path)


def simulate_or(
    instance: Instance,
    path: Sequence[int],
    profile: OrProfile,
    samples: int,
    seed: int = 0,
) -> SimulationResult:
    """Monte-Carlo execution of the restock decisions of a profile."""
    seq = validate_path(instance, path)
    if tuple(profile.path) != seq:
        raise InvalidPathError(f"Profile was built for {list(profile.path)}, not {list(seq)}")
    if samples < 1:
        raise ValueError(f"samples must be at least 1, got {samples}")

    rng = np.random.default_rng(seed)
    Q = instance.capacity
    residual = np.full(samples, Q, dtype=np.int64)
    cost = np.zeros(samples)
    for j, customer in enumerate(seq):
        if j >= 1:
            take = profile.restock[j, residual]
            cost[take] += instance.preventive_cost(seq[j - 1], customer)
            residual[take] = Q
        pmf = instance.demand(customer).pmf
        demand = rng.choice(pmf.size, size=samples, p=pmf)
        excess = np.maximum(demand - residual, 0)
        trips = -(-excess // Q)
        cost += instance.failure_cost(customer) * trips
        residual = trips * Q + residual - demand

    stderr = float(cost.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return SimulationResult(mean=float(cost.mean()), stderr=stderr, samples=samples, seed=seed)


def or_policy_exhaustive(instance: Instance, path: Sequence[int]) -> float:
    """Optimal OR recourse by explicit recursion over every demand history.

    No state is shared between histories, so this is independent of the
    tabulated recursion it is used to check.
    """
    seq = validate_path(instance, path)
    if len(seq) > EXHAUSTIVE_MAX_LEN:
        raise OracleSizeError(f"Exhaustive policy search supports paths of at most {EXHAUSTIVE_MAX_LEN} customers")
    histories = 1
    for i in seq:
        histories *= int(instance.demand(i).support.size)
    if histories > EXHAUSTIVE_MAX_HISTORIES:
        raise OracleSizeError(f"Path {list(seq)} has {histories} demand histories, limit {EXHAUSTIVE_MAX_HISTORIES}")

    Q = instance.capacity
    laws = [
        [(int(s), float(m)) for s, m in zip(instance.demand(i).support, instance.demand(i).mass)]
        for i in seq
    ]

    def serve(j: int, residual: int) -> float:
        customer = seq[j]
        expected = 0.0
        for s, mass in laws[j]:
            trips = max(0, math.ceil((s - residual) / Q))
            after = trips * Q + residual - s
            expected += mass * (instance.failure_cost(customer) * trips + best(j + 1, after))
        return expected

    def best(j: int, residual: int) -> float:
        if j == len(seq):
            return 0.0
        proceed = serve(j, residual)
        if j == 0 or residual == Q:
            return proceed
        restock = instance.preventive_cost(seq[j - 1], seq[j]) + serve(j, Q)
        return min(proceed, restock)

    return best(0, Q)


class RecourseCache:
    """Thread-safe memo of path recourse keyed on the canonical orientation."""

    def __init__(self, instance: Instance, policy):
        self.instance = instance
        self.policy = Policy.parse(policy)
        self._values: Dict[Path, RecourseValue] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def evaluate(self, path: Sequence[int]) -> RecourseValue:
        seq = tuple(int(i) for i in path)
        key = canonical_orientation(seq)
        with self._lock:
            cached = self._values.get(key)
            if cached is not None:
                self.hits += 1
        if cached is None:
            cached = evaluate(self.instance, key, self.policy)
            with self._lock:
                self._values.setdefault(key, cached)
                self.misses += 1
        return cached if key == seq else cached.reversed()

    def value(self, path: Sequence[int]) -> float:
        return self.evaluate(path).value

    def __len__(self) -> int:
        return len(self._values)
