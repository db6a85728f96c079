"""
Shared argument handling for the MCP tools and the CLI.
"""

import logging
from typing import Any, Dict, Optional

from ..core.builtin_instances import BUILTIN_INSTANCES, load_builtin
from ..core.errors import InstanceFormatError
from ..core.instance import Instance, VariantConfig, derive_variant, load_instance, parse_instance
from . import config

logger = logging.getLogger(__name__)

BUILTIN_PREFIX = "builtin:"

INSTANCE_PROPERTIES: Dict[str, Any] = {
    "instance": {
        "type": "object",
        "description": "Inline instance document (n, distance, Q, f, M, bF, bP, demands).",
    },
    "path": {
        "type": "string",
        "description": "Instance file (.json native or .vrp CVRPLIB), or 'builtin:<name>'.",
    },
    "instance_format": {
        "type": "string",
        "description": "Instance file format; inferred from the extension when omitted.",
        "enum": ["json", "cvrplib"],
    },
    "round_distances": {
        "type": "boolean",
        "description": "Round CVRPLIB distances to the nearest integer.",
        "default": False,
    },
    "variant": {
        "type": "string",
        "description": "Derive f and M for a problem variant before use.",
        "enum": ["vrpsd", "ecc", "frc", "basic"],
    },
}


def resolve_instance(source: str, fmt: Optional[str] = None, round_distances: bool = False) -> Instance:
    """Instance from a file path or a 'builtin:<name>' reference."""
    if source.startswith(BUILTIN_PREFIX):
        return load_builtin(source[len(BUILTIN_PREFIX):])
    return load_instance(source, fmt=fmt, round_distances=round_distances)


def instance_from_arguments(args: Dict[str, Any]) -> Instance:
    if args.get("instance") is not None:
        instance = parse_instance(args["instance"])
    elif args.get("path"):
        instance = resolve_instance(args["path"], args.get("instance_format"), bool(args.get("round_distances", False)))
    else:
        raise InstanceFormatError(
            f"Provide either 'instance' or 'path' (built-ins: {', '.join(sorted(BUILTIN_INSTANCES))})"
        )
    if args.get("variant"):
        instance = derive_variant(instance, VariantConfig.from_name(args["variant"]))
    return instance


def solver_options(args: Dict[str, Any]) -> config.SolverOptions:
    return config.SolverOptions(
        time_limit=args.get("time_limit"),
        node_limit=args.get("node_limit"),
        e_cuts=bool(args.get("e_cuts", True)),
        s_cuts=bool(args.get("s_cuts", True)),
        classic=bool(args.get("classic", False)),
        check_superadditivity_depth=args.get("check_superadditivity"),
        force=bool(args.get("force", False)),
        seed=int(args.get("seed", 0)),
        cuts_log=args.get("cuts_log"),
    )
