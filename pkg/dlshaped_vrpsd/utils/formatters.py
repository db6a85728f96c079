"""
Data formatting utilities
"""

import json
from typing import Any, Dict, List


def _fmt(value: Any, digits: int = 6) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.{digits}f}"
    return str(value)


def format_routes_table(solution: Dict[str, Any]) -> str:
    """Format the routes of a solution document as a table."""
    routes = solution.get("routes", [])
    if not routes:
        return "No routes found."

    rows = [
        {
            "route": " -> ".join(str(i) for i in [0, *r["path"], 0]),
            "first_stage": _fmt(r["first_stage"]),
            "recourse": _fmt(r["recourse"]),
        }
        for r in routes
    ]
    route_width = max(len("Route"), max(len(r["route"]) for r in rows))
    first_width = max(len("First stage"), max(len(r["first_stage"]) for r in rows))
    rec_width = max(len("Recourse"), max(len(r["recourse"]) for r in rows))

    header = f"| {'Route':<{route_width}} | {'First stage':>{first_width}} | {'Recourse':>{rec_width}} |"
    separator = f"|{'-' * (route_width + 2)}|{'-' * (first_width + 2)}|{'-' * (rec_width + 2)}|"
    lines = [header, separator]
    for r in rows:
        lines.append(f"| {r['route']:<{route_width}} | {r['first_stage']:>{first_width}} | {r['recourse']:>{rec_width}} |")
    return "\n".join(lines)


def format_solution_summary(solution: Dict[str, Any]) -> str:
    """One block of key figures of a solution document."""
    lines = [
        f"Instance: {solution.get('instance')}",
        f"Status: {solution.get('status')} ({solution.get('method')}, policy {str(solution.get('policy')).upper()})",
        f"Objective: {_fmt(solution.get('objective'))}",
        f"  First stage: {_fmt(solution.get('first_stage_cost'))}",
        f"  Recourse: {_fmt(solution.get('recourse_cost'))}",
        f"Bound: {_fmt(solution.get('bound'))} | Gap: {_fmt(solution.get('gap'))}",
        f"Fleet size: {solution.get('fleet_size')} | Nodes: {solution.get('nodes')}",
    ]
    cuts = solution.get("cuts") or {}
    if cuts:
        lines.append("Cuts: " + ", ".join(f"{kind}={count}" for kind, count in cuts.items() if count))
    lines.append(f"Wall time: {_fmt(solution.get('wall_time'), 3)}s")
    return "\n".join(lines)


def format_solution(solution: Dict[str, Any], format_type: str = "table") -> str:
    if format_type == "json":
        return json.dumps(solution, indent=2)
    if format_type == "summary":
        return format_solution_summary(solution)
    return format_solution_summary(solution) + "\n\n" + format_routes_table(solution)


def format_recourse(values: Dict[str, Any], format_type: str = "table") -> str:
    """Format a route evaluation document."""
    if format_type == "json":
        return json.dumps(values, indent=2)
    lines = [
        f"Route {values['path']} under {values['policy'].upper()}",
        f"Recourse: {_fmt(values['value'])} ({values['orientation']})",
    ]
    if format_type == "summary":
        return "\n".join(lines)
    lines.append(f"  forward:  {_fmt(values['forward'])}")
    lines.append(f"  backward: {_fmt(values['backward'])}")
    lines.append(f"First stage: {_fmt(values.get('first_stage'))}")
    thresholds = values.get("restock_thresholds")
    if thresholds:
        lines.append("Restock thresholds (largest residual that triggers a preventive return):")
        for customer, level in thresholds.items():
            lines.append(f"  after {customer}: {'never' if level is None else level}")
    simulation = values.get("simulation")
    if simulation:
        lines.append(
            f"Monte-Carlo: {_fmt(simulation['mean'])} +/- {_fmt(simulation['stderr'])} "
            f"({simulation['samples']} samples, seed {simulation['seed']})"
        )
    return "\n".join(lines)


def format_report(report: Dict[str, Any], format_type: str = "table") -> str:
    """Format a property-check or reproduction report."""
    if format_type == "json":
        return json.dumps(report, indent=2)
    title = report.get("property") or report.get("name")
    lines = [f"{title}: {report.get('status')}"]
    if "checked" in report:
        lines[0] += f" ({report['checked']} checks)"
    if format_type == "summary":
        return lines[0]

    for item in report.get("assertions", []):
        mark = "PASS" if item["passed"] else "FAIL"
        lines.append(f"  [{mark}] {item['assertion']}: {_fmt(item['actual'])} (expected {item['expected']})")
    witnesses: List[Dict[str, Any]] = report.get("witnesses", [])
    for w in witnesses:
        lines.append("  witness: " + ", ".join(f"{k}={_fmt(v)}" for k, v in w.items()))
    return "\n".join(lines)
