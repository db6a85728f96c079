"""
Evaluate route tool
"""

import asyncio
import logging
from typing import Any, Dict, Optional, Sequence

from mcp.types import CallToolRequest, CallToolResult, Tool, TextContent

from ..core.instance import Instance, validate_path
from ..core.recourse import Policy, evaluate, or_cost_to_go, simulate_or
from ..utils.arguments import INSTANCE_PROPERTIES, instance_from_arguments
from ..utils.formatters import format_recourse

logger = logging.getLogger(__name__)


def evaluate_route(
    instance: Instance,
    route: Sequence[int],
    policy,
    samples: Optional[int] = None,
    seed: int = 0,
) -> Dict[str, Any]:
    """Recourse of a route in both orientations with the OR decision summary."""
    policy = Policy.parse(policy)
    path = validate_path(instance, route)
    value = evaluate(instance, path, policy)
    document = value.to_dict()
    document["first_stage"] = instance.route_cost(path)
    document["total"] = document["first_stage"] + value.value
    if policy is Policy.OR:
        profile = or_cost_to_go(instance, value.best_path)
        document["restock_thresholds"] = {str(k): v for k, v in profile.restock_thresholds().items()}
        if samples:
            result = simulate_or(instance, value.best_path, profile, samples=samples, seed=seed)
            document["simulation"] = {
                "mean": result.mean, "stderr": result.stderr, "samples": result.samples, "seed": result.seed,
            }
    return document


def get_tool_definition() -> Tool:
    """Get the tool definition for evaluate_route."""
    return Tool(
        name="evaluate_route",
        description="Expected recourse of one route under optimal restocking (OR) or detour-to-depot (DTD), in both orientations, with an optional Monte-Carlo cross-check of the OR policy.",
        inputSchema={
            "type": "object",
            "properties": {
                **INSTANCE_PROPERTIES,
                "route": {
                    "type": "array",
                    "items": {"type": "integer"},
                    "description": "Customers in visiting order (depot omitted)",
                },
                "policy": {
                    "type": "string",
                    "description": "Recourse policy",
                    "enum": ["or", "dtd"],
                    "default": "or",
                },
                "samples": {
                    "type": "integer",
                    "description": "Monte-Carlo samples for the OR cross-check (0 to skip)",
                    "default": 0,
                    "minimum": 0,
                },
                "seed": {
                    "type": "integer",
                    "description": "Random seed of the Monte-Carlo run",
                    "default": 0,
                },
                "format": {
                    "type": "string",
                    "description": "Output format",
                    "enum": ["table", "json", "summary"],
                    "default": "table",
                },
            },
            "additionalProperties": False,
            "required": ["route"],
        },
    )


async def handle_call(request: CallToolRequest) -> CallToolResult:
    """Handle the evaluate_route tool call."""
    try:
        args = request.arguments or {}

        route = args.get("route") or []
        policy = args.get("policy", "or")
        samples = args.get("samples", 0)
        seed = args.get("seed", 0)
        format_type = args.get("format", "table")

        instance = instance_from_arguments(args)
        document = await asyncio.to_thread(evaluate_route, instance, route, policy, samples, seed)

        return CallToolResult(
            content=[TextContent(type="text", text=format_recourse(document, format_type))],
            isError=False,
        )

    except Exception as e:
        logger.error(f"Error in evaluate_route: {e}")
        return CallToolResult(
            content=[TextContent(type="text", text=f"Error: {str(e)}")],
            isError=True,
        )
