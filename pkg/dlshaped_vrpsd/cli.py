"""
Command-line interface: solve, evaluate, check and reproduce.

Every command prints one JSON document on stdout (or a table with --table);
logs go to stderr.
"""

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from . import __version__
from .core.builtin_instances import builtin_names
from .core.errors import VrpsdError
from .core.instance import VARIANTS, VariantConfig
from .core.oracle import brute_force_solve
from .core.recourse import Policy
from .core.reproduce import reproduction_names, run as run_reproduction
from .core.solver import solve
from .tools.check_property import PROPERTIES, run_check
from .tools.evaluate_route import evaluate_route
from .utils import config
from .utils.arguments import BUILTIN_PREFIX, resolve_instance
from .utils.formatters import format_recourse, format_report, format_solution

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_LIMIT = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports bad flags through the JSON error path."""

    def error(self, message):
        raise UsageError(message)


@dataclass
class RunReport:
    """Replayable record of one CLI invocation."""
    command: str
    instance: Optional[str]
    options: Dict[str, Any]
    result: Dict[str, Any]
    seed: int = 0
    version: str = __version__
    timings: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def parse_route(text: str) -> List[int]:
    try:
        return [int(token) for token in text.replace(" ", "").split(",") if token]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Route must be comma-separated customer indices, got {text!r}") from None


def parse_depth(text: str) -> int:
    """Accept 'depth=k' or a bare k."""
    value = text.split("=", 1)[1] if text.startswith("depth=") else text
    try:
        depth = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Expected depth=k, got {text!r}") from None
    if depth < 2:
        raise argparse.ArgumentTypeError(f"Superadditivity depth must be at least 2, got {depth}")
    return depth


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (Monte-Carlo runs)")
    common.add_argument("--out", default=None, help="write the JSON report to this file instead of stdout")
    common.add_argument("--table", action="store_true", help="print a human-readable table instead of JSON")
    common.add_argument("--log-level", default=None, help="override VRPSD_LOG_LEVEL")

    source = _Parser(add_help=False)
    source.add_argument("instance", help=f"instance file (.json or .vrp) or {BUILTIN_PREFIX}<name> "
                                         f"(built-ins: {', '.join(builtin_names())})")
    source.add_argument("--format", dest="instance_format", choices=["json", "cvrplib"], default=None,
                        help="instance file format (default: from the extension)")
    source.add_argument("--round-distances", action="store_true", help="round CVRPLIB distances to integers")
    source.add_argument("--policy", choices=[p.value for p in Policy], default=Policy.OR.value)

    parser = _Parser(prog="dlshaped-vrpsd", description="Exact DL-shaped branch-and-cut for the VRPSD")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_solve = commands.add_parser("solve", parents=[common, source], help="solve an instance to optimality")
    p_solve.add_argument("--variant", choices=sorted(VARIANTS), default=None)
    p_solve.add_argument("--time-limit", type=float, default=None, help="seconds")
    p_solve.add_argument("--node-limit", type=int, default=None)
    p_solve.add_argument("--no-e-cuts", action="store_true")
    p_solve.add_argument("--no-s-cuts", action="store_true")
    p_solve.add_argument("--classic", action="store_true", help="classic single-variable optimality cut")
    p_solve.add_argument("--oracle-check", action="store_true", help="compare against the brute-force optimum")
    p_solve.add_argument("--check-superadditivity", type=parse_depth, default=None, metavar="depth=k")
    p_solve.add_argument("--force", action="store_true", help="solve even if the superadditivity check fails")
    p_solve.add_argument("--cuts-log", default=None, help="write every added cut to this JSON file")

    p_eval = commands.add_parser("evaluate", parents=[common, source], help="recourse of one route")
    p_eval.add_argument("route", type=parse_route, help="customers in order, e.g. 1,2,3")
    p_eval.add_argument("--samples", type=int, default=0, help="Monte-Carlo samples for the OR cross-check")

    p_check = commands.add_parser("check", parents=[common, source], help="check a recourse property")
    p_check.add_argument("property", choices=list(PROPERTIES))
    p_check.add_argument("--max-len", type=int, default=None)
    p_check.add_argument("--route", type=parse_route, default=None, help="restrict 'subsequence' to one path")

    p_repro = commands.add_parser("reproduce", parents=[common], help="run the assertions of a built-in example")
    p_repro.add_argument("name", choices=reproduction_names())
    return parser


def _variant(name: Optional[str]) -> Optional[VariantConfig]:
    return VariantConfig.from_name(name) if name else None


def cmd_solve(args) -> tuple:
    instance = resolve_instance(args.instance, args.instance_format, args.round_distances)
    options = config.SolverOptions(
        time_limit=args.time_limit,
        node_limit=args.node_limit,
        e_cuts=not args.no_e_cuts,
        s_cuts=not args.no_s_cuts,
        classic=args.classic,
        check_superadditivity_depth=args.check_superadditivity,
        force=args.force,
        seed=args.seed,
        cuts_log=args.cuts_log,
    )
    variant = _variant(args.variant)
    solution = solve(instance, variant, args.policy, options)
    result = solution.to_dict()
    code = EXIT_LIMIT if solution.status == "limit" else EXIT_OK

    if args.oracle_check:
        oracle = brute_force_solve(instance, variant, args.policy)
        matches = abs(oracle.objective - solution.objective) <= config.OBJECTIVE_TOL * max(1.0, abs(oracle.objective))
        result["oracle"] = {"objective": oracle.objective, "matches": matches}
        if not matches:
            logger.error(f"Solver objective {solution.objective:.6f} differs from brute force {oracle.objective:.6f}")
            code = EXIT_ERROR

    options_doc = asdict(options)
    options_doc.update(policy=args.policy, variant=args.variant, oracle_check=args.oracle_check)
    rendered = format_solution(result, "table") if args.table else None
    return instance.name, options_doc, result, rendered, code


def cmd_evaluate(args) -> tuple:
    instance = resolve_instance(args.instance, args.instance_format, args.round_distances)
    result = evaluate_route(instance, args.route, args.policy, args.samples, args.seed)
    rendered = format_recourse(result, "table") if args.table else None
    options = {"policy": args.policy, "route": args.route, "samples": args.samples}
    return instance.name, options, result, rendered, EXIT_OK


def cmd_check(args) -> tuple:
    instance = resolve_instance(args.instance, args.instance_format, args.round_distances)
    result = run_check(instance, args.property, args.policy, args.max_len, args.route).to_dict()
    rendered = format_report(result, "table") if args.table else None
    options = {"policy": args.policy, "property": args.property, "max_len": args.max_len, "route": args.route}
    return instance.name, options, result, rendered, EXIT_OK


def cmd_reproduce(args) -> tuple:
    report = run_reproduction(args.name)
    result = report.to_dict()
    rendered = format_report(result, "table") if args.table else None
    return report.name, {}, result, rendered, EXIT_OK if report.passed else EXIT_ERROR


COMMANDS = {
    "solve": cmd_solve,
    "evaluate": cmd_evaluate,
    "check": cmd_check,
    "reproduce": cmd_reproduce,
}


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
        logger.info(f"Wrote {out}")
    else:
        sys.stdout.write(text + "\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point of the dlshaped-vrpsd script; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        sys.stdout.write(json.dumps({"error": "UsageError", "message": str(e)}) + "\n")
        return EXIT_ERROR

    config.configure_logging(args.log_level, stream=sys.stderr)
    started = time.monotonic()
    try:
        name, options, result, rendered, code = COMMANDS[args.command](args)
    except (VrpsdError, ValueError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        _emit(json.dumps({"error": type(e).__name__, "message": str(e)}), args.out)
        return EXIT_ERROR

    report = RunReport(
        command=args.command,
        instance=name,
        options=options,
        result=result,
        seed=args.seed,
        timings={"wall_time": time.monotonic() - started},
    )
    _emit(rendered if rendered is not None else json.dumps(report.to_dict(), indent=2, default=str), args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
