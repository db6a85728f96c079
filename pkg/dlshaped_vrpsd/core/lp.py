"""
LP relaxation contract and its HiGHS implementation.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix

from .errors import LpError

logger = logging.getLogger(__name__)

LP_TOL = 1e-7
SENSES = (">=", "<=", "==")


@dataclass(frozen=True)
class LpResult:
    status: str
    objective: float
    x: Optional[np.ndarray]

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class LpSubsystem(ABC):
    """Minimal LP handle used by the branch-and-cut loop."""

    last: Optional[LpResult] = None

    @abstractmethod
    def add_variable(self, name: str, lower: float, upper: Optional[float], cost: float) -> int:
        ...

    @abstractmethod
    def add_row(self, coefs: Mapping[int, float], sense: str, rhs: float) -> int:
        ...

    @abstractmethod
    def set_bounds(self, index: int, lower: float, upper: Optional[float]) -> None:
        ...

    @abstractmethod
    def get_bounds(self, index: int) -> Tuple[float, Optional[float]]:
        ...

    @abstractmethod
    def solve(self) -> LpResult:
        ...

    @property
    @abstractmethod
    def num_variables(self) -> int:
        ...

    @property
    @abstractmethod
    def num_rows(self) -> int:
        ...

    def values(self) -> np.ndarray:
        if self.last is None or not self.last.optimal:
            raise LpError("No optimal LP solution available")
        return self.last.x

    def objective(self) -> float:
        if self.last is None or not self.last.optimal:
            raise LpError("No optimal LP solution available")
        return self.last.objective


class HighsLp(LpSubsystem):
    """scipy.optimize.linprog(method="highs") over rows kept in COO triplets."""

    def __init__(self, tol: float = LP_TOL, time_limit: Optional[float] = None):
        self.names: List[str] = []
        self.costs: List[float] = []
        self.bounds: List[Tuple[float, Optional[float]]] = []
        self._rows: List[Tuple[Dict[int, float], str, float]] = []
        self.tol = tol
        self.time_limit = time_limit
        self.last = None
        self.solves = 0

    @property
    def num_variables(self) -> int:
        return len(self.names)

    @property
    def num_rows(self) -> int:
        return len(self._rows)

    def add_variable(self, name: str, lower: float, upper: Optional[float], cost: float) -> int:
        self.names.append(name)
        self.costs.append(float(cost))
        self.bounds.append((float(lower), None if upper is None else float(upper)))
        return len(self.names) - 1

    def add_row(self, coefs: Mapping[int, float], sense: str, rhs: float) -> int:
        if sense not in SENSES:
            raise LpError(f"Unknown row sense {sense!r}")
        for index in coefs:
            if not 0 <= index < len(self.names):
                raise LpError(f"Row references unknown variable {index}")
        self._rows.append(({int(k): float(v) for k, v in coefs.items() if v != 0.0}, sense, float(rhs)))
        return len(self._rows) - 1

    def set_bounds(self, index: int, lower: float, upper: Optional[float]) -> None:
        self.bounds[index] = (float(lower), None if upper is None else float(upper))

    def get_bounds(self, index: int) -> Tuple[float, Optional[float]]:
        return self.bounds[index]

    def _matrices(self):
        n = len(self.names)
        ub_r, ub_c, ub_v, b_ub = [], [], [], []
        eq_r, eq_c, eq_v, b_eq = [], [], [], []
        for coefs, sense, rhs in self._rows:
            if sense == "==":
                row = len(b_eq)
                for k, v in coefs.items():
                    eq_r.append(row); eq_c.append(k); eq_v.append(v)
                b_eq.append(rhs)
            else:
                # linprog takes A_ub x <= b_ub
                sign = -1.0 if sense == ">=" else 1.0
                row = len(b_ub)
                for k, v in coefs.items():
                    ub_r.append(row); ub_c.append(k); ub_v.append(sign * v)
                b_ub.append(sign * rhs)
        A_ub = coo_matrix((ub_v, (ub_r, ub_c)), shape=(len(b_ub), n)).tocsr() if b_ub else None
        A_eq = coo_matrix((eq_v, (eq_r, eq_c)), shape=(len(b_eq), n)).tocsr() if b_eq else None
        return A_ub, (b_ub or None), A_eq, (b_eq or None)

    def solve(self) -> LpResult:
        if any(lo > hi + self.tol for lo, hi in self.bounds if hi is not None):
            self.last = LpResult(status="infeasible", objective=float("inf"), x=None)
            return self.last
        A_ub, b_ub, A_eq, b_eq = self._matrices()
        options = {
            "primal_feasibility_tolerance": self.tol,
            "dual_feasibility_tolerance": self.tol,
            "disp": False,
        }
        if self.time_limit is not None:
            options["time_limit"] = float(self.time_limit)
        res = linprog(
            c=np.array(self.costs),
            A_ub=A_ub, b_ub=b_ub,
            A_eq=A_eq, b_eq=b_eq,
            bounds=self.bounds,
            method="highs",
            options=options,
        )
        self.solves += 1
        if res.status == 0:
            self.last = LpResult(status="optimal", objective=float(res.fun), x=np.asarray(res.x))
        elif res.status == 2:
            self.last = LpResult(status="infeasible", objective=float("inf"), x=None)
        else:
            raise LpError(f"HiGHS failed: status={res.status}, message={res.message}")
        logger.debug(f"LP {self.num_variables} vars x {self.num_rows} rows: {self.last.status} {self.last.objective:.6f}")
        return self.last
