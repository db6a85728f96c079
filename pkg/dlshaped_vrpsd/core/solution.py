"""
Solutions returned by the solver, the warm start and the brute-force oracle.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from .errors import VrpsdError
from .instance import Instance, Path, path_is_feasible
from .recourse import Policy, RecourseValue

OBJECTIVE_CHECK_TOL = 1e-6


@dataclass(frozen=True)
class RouteResult:
    """One route (0, path, 0) in its cheaper recourse orientation."""
    path: Path
    first_stage: float
    recourse: float
    forward: float
    backward: float

    @classmethod
    def build(cls, instance: Instance, path: Path, value: RecourseValue) -> "RouteResult":
        oriented = value.best_path
        return cls(
            path=tuple(oriented),
            first_stage=instance.route_cost(oriented),
            recourse=value.value,
            forward=value.forward if oriented == value.path else value.backward,
            backward=value.backward if oriented == value.path else value.forward,
        )

    @property
    def total(self) -> float:
        return self.first_stage + self.recourse

    def to_dict(self) -> Dict[str, Any]:
        return {
            "path": list(self.path),
            "orientation": "forward",
            "first_stage": self.first_stage,
            "recourse": self.recourse,
            "recourse_reverse": self.backward,
        }


@dataclass
class Solution:
    instance_name: str
    policy: Policy
    routes: List[RouteResult]
    status: str
    bound: float = -math.inf
    nodes: int = 0
    cuts: Dict[str, int] = field(default_factory=dict)
    wall_time: float = 0.0
    method: str = "dl-shaped"
    cut_log: List[Dict[str, Any]] = field(default_factory=list, repr=False)

    @property
    def fleet_size(self) -> int:
        return len(self.routes)

    @property
    def first_stage_cost(self) -> float:
        return sum(r.first_stage for r in self.routes)

    @property
    def recourse_cost(self) -> float:
        return sum(r.recourse for r in self.routes)

    @property
    def objective(self) -> float:
        if not self.routes:
            return math.inf
        return self.first_stage_cost + self.recourse_cost

    @property
    def gap(self) -> Optional[float]:
        if not self.routes or not math.isfinite(self.bound):
            return None
        return max(0.0, (self.objective - self.bound) / max(abs(self.objective), 1e-10))

    def check(self, instance: Instance) -> None:
        """Raise VrpsdError unless the routes partition the customers into feasible paths."""
        seen = [i for r in self.routes for i in r.path]
        if sorted(seen) != instance.customers:
            raise VrpsdError(f"Routes {[list(r.path) for r in self.routes]} do not partition the customers")
        for r in self.routes:
            if not path_is_feasible(instance, r.path):
                raise VrpsdError(f"Route {list(r.path)} exceeds the expected capacity")
        if len(self.routes) not in instance.fleet:
            raise VrpsdError(f"Fleet size {len(self.routes)} not in {list(instance.fleet)}")
        expected = sum(instance.route_cost(r.path) + min(r.forward, r.backward) for r in self.routes)
        if abs(expected - self.objective) > OBJECTIVE_CHECK_TOL:
            raise VrpsdError(f"Stored objective {self.objective} differs from recomputed {expected}")

    def to_dict(self) -> Dict[str, Any]:
        objective = self.objective if self.routes else None
        return {
            "instance": self.instance_name,
            "policy": self.policy.value,
            "method": self.method,
            "status": self.status,
            "objective": objective,
            "first_stage_cost": self.first_stage_cost if self.routes else None,
            "recourse_cost": self.recourse_cost if self.routes else None,
            "bound": self.bound if math.isfinite(self.bound) else None,
            "gap": self.gap,
            "fleet_size": self.fleet_size,
            "routes": [r.to_dict() for r in self.routes],
            "nodes": self.nodes,
            "cuts": dict(self.cuts),
            "wall_time": self.wall_time,
        }
