"""
Reproduction runs: each built-in instance carries a list of checked assertions.
"""

import logging
import time
from dataclasses import dataclass, field
from itertools import permutations
from typing import Any, Callable, Dict, List

from ..utils.config import SolverOptions
from .bounds import lower_bound_L1
from .builtin_instances import BUILTIN_ALIASES, load_builtin, resolve_builtin
from .cuts import CutKind, build_initial_pool, build_p_cut
from .errors import InstanceFormatError
from .instance import Instance, edge, path_edges
from .oracle import check_monotonicity, check_path_subsequences, enumerate_L, verify_telescoping_assignment
from .recourse import Policy, RecourseCache, dtd_recourse, or_recourse
from .solver import solve

logger = logging.getLogger(__name__)

EXACT_TOL = 1e-9


@dataclass
class AssertionResult:
    description: str
    expected: str
    actual: Any
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {"assertion": self.description, "expected": self.expected, "actual": self.actual, "passed": self.passed}


@dataclass
class ReproductionReport:
    name: str
    assertions: List[AssertionResult] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def expect(self, description: str, expected: str, actual: Any, passed: bool) -> None:
        self.assertions.append(AssertionResult(description, expected, actual, bool(passed)))
        if not passed:
            logger.warning(f"{self.name}: {description} failed (expected {expected}, got {actual})")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "status": "pass" if self.passed else "fail",
            "passed": sum(a.passed for a in self.assertions),
            "total": len(self.assertions),
            "assertions": [a.to_dict() for a in self.assertions],
            "wall_time": self.wall_time,
        }


def _non_monotone(instance: Instance, report: ReproductionReport) -> None:
    long_path = or_recourse(instance, (1, 2, 3)).value
    short_path = or_recourse(instance, (1, 3)).value
    report.expect("OR recourse of (1,2,3)", "in [3.24, 3.26]", long_path, 3.24 <= long_path <= 3.26)
    report.expect("OR recourse of (1,3)", "in [6.07, 6.09]", short_path, 6.07 <= short_path <= 6.09)
    check = check_path_subsequences(instance, Policy.OR, (1, 2, 3))
    flagged = [w["subsequence"] for w in check.witnesses]
    report.expect("OR subsequence check flags (1,3) inside (1,2,3)", "violation at [1, 3]", flagged, [1, 3] in flagged)
    report.expect("failure cost of customer 2", "4", instance.failure_cost(2), abs(instance.failure_cost(2) - 4) < EXACT_TOL)
    pool = {cut.customers: cut.coefficient for cut in build_initial_pool(instance, Policy.OR)}
    pair = pool.get((1, 3))
    report.expect(
        "initial S-cut of {1,3} uses L({1,3},1)", "within 0.01 of 6.08", pair,
        pair is not None and abs(pair - 6.08) <= 0.01,
    )


def _overestimation(instance: Instance, report: ReproductionReport) -> None:
    route = tuple(range(1, 9))
    whole = dtd_recourse(instance, route).value
    halves = dtd_recourse(instance, (1, 2, 3, 4)).value + dtd_recourse(instance, (5, 6, 7, 8)).value
    report.expect("DTD recourse of (1,...,8)", "in [2.51, 2.53]", whole, 2.51 <= whole <= 2.53)
    report.expect("DTD recourse of (1,2,3,4) plus (5,6,7,8)", "> 2.62", halves, halves > 2.62)
    check = check_path_subsequences(instance, Policy.DTD, route)
    report.expect(
        "no subsequence of (1,...,8) has larger DTD recourse", "0 violations",
        len(check.witnesses), check.holds,
    )
    cache = RecourseCache(instance, Policy.DTD)
    x = {e: 1.0 for e in path_edges(route)}
    x.update({edge(0, route[0]): 1.0, edge(0, route[-1]): 1.0})
    halves_cuts = [build_p_cut(instance, p, cache) for p in ((1, 2, 3, 4), (5, 6, 7, 8))]
    # theta-free part moved to the right-hand side at the route's x
    implied = sum(cut.rhs - cut.lhs(x, {}) for cut in halves_cuts)
    report.expect(
        "P-cuts of the halves force the route's theta sum above its recourse", f"> {whole:.4f}",
        implied, implied > whole + EXACT_TOL,
    )
    telescoping = verify_telescoping_assignment(instance, Policy.DTD, [route])
    report.expect(
        "prefix-increment theta violates a subpath P-cut", "violated", telescoping.to_dict()["status"],
        not telescoping.holds,
    )
    monotonicity = check_monotonicity(instance, max_set=5)
    report.expect("monotonicity property", "violated", monotonicity.to_dict()["status"], not monotonicity.holds)


def _vanishing_s_cuts(instance: Instance, report: ReproductionReport) -> None:
    rotations = [(1, 2, 3, 4), (2, 3, 4, 1), (3, 4, 1, 2), (4, 1, 2, 3)]
    values = [or_recourse(instance, p).value for p in rotations]
    report.expect("OR recourse of every ring rotation", "1/8", values, all(abs(v - 0.125) <= EXACT_TOL for v in values))
    diagonal = [
        p for p in permutations((1, 2, 3, 4))
        if {edge(1, 3), edge(2, 4)} & set(path_edges(p))
    ]
    worst = max(or_recourse(instance, p).value for p in diagonal)
    report.expect("OR recourse of routes using a diagonal", "0", worst, abs(worst) <= EXACT_TOL)
    dtd = sorted({round(dtd_recourse(instance, p).value, 12) for p in permutations((1, 2, 3, 4))})
    report.expect("DTD recourse of every four-customer path", "1/8", dtd, all(abs(v - 0.125) <= EXACT_TOL for v in dtd))

    forbidden = [edge(1, 3), edge(2, 4)]
    full, _ = enumerate_L(instance, instance.customers, 1, (), Policy.OR)
    restricted, _ = enumerate_L(instance, instance.customers, 1, forbidden, Policy.OR)
    report.expect("L(N,1)", "0", full, abs(full) <= EXACT_TOL)
    report.expect("L(N,1) without the diagonals", "1/8", restricted, abs(restricted - 0.125) <= EXACT_TOL)
    general = lower_bound_L1(instance, instance.customers, 1, forbidden)
    report.expect("general bound without the diagonals", "1/16", general, abs(general - 0.0625) <= EXACT_TOL)
    pool = build_initial_pool(instance, Policy.OR)
    report.expect("initial S-cut pool", "empty", len(pool), not pool)

    solution = solve(instance, policy=Policy.OR, options=SolverOptions())
    report.expect("optimal objective", "5.125", solution.objective, abs(solution.objective - 5.125) <= 1e-6)
    ring = sorted(path_edges((1, 2, 3, 4)) + [edge(1, 4)])
    e_cuts = [
        c for c in solution.cut_log
        if c["kind"] == CutKind.E.value and sorted(tuple(e) for e in c["edges"]) == ring
        and abs(c["L"] - 0.125) <= EXACT_TOL and abs(c["rhs"] + 0.25) <= EXACT_TOL
    ]
    report.expect(
        "E-cut sum theta >= 1/8(x12 + x23 + x34 + x14 - 2) generated", ">= 1 matching cut",
        len(e_cuts), bool(e_cuts),
    )


REPRODUCTIONS: Dict[str, Callable[[Instance, ReproductionReport], None]] = {
    "non-monotone": _non_monotone,
    "overestimation": _overestimation,
    "vanishing-s-cuts": _vanishing_s_cuts,
}


def reproduction_names() -> List[str]:
    """Canonical reproduction names followed by their aliases."""
    return sorted(REPRODUCTIONS) + sorted(a for a, name in BUILTIN_ALIASES.items() if name in REPRODUCTIONS)


def run(name: str) -> ReproductionReport:
    """Run the assertion list attached to a built-in instance (aliases accepted)."""
    name = resolve_builtin(name)
    if name not in REPRODUCTIONS:
        raise InstanceFormatError(f"No reproduction named {name!r}, expected one of {reproduction_names()}")
    started = time.monotonic()
    report = ReproductionReport(name=name)
    REPRODUCTIONS[name](load_builtin(name), report)
    report.wall_time = time.monotonic() - started
    logger.info(f"Reproduction {name}: {sum(a.passed for a in report.assertions)}/{len(report.assertions)} passed")
    return report
