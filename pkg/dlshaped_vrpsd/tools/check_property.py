"""
Check property tool
"""

import asyncio
import logging
from typing import Optional, Sequence

from mcp.types import CallToolRequest, CallToolResult, Tool, TextContent

from ..core.instance import Instance
from ..core.oracle import (
    PropertyReport,
    check_monotonicity,
    check_path_subsequences,
    check_subsequence_monotonicity,
    check_superadditivity,
)
from ..core.recourse import Policy
from ..utils.arguments import INSTANCE_PROPERTIES, instance_from_arguments
from ..utils.formatters import format_report

logger = logging.getLogger(__name__)

PROPERTIES = ("superadditivity", "monotonicity", "subsequence")
DEFAULT_DEPTH = {"superadditivity": 6, "monotonicity": 4, "subsequence": 5}


def run_check(
    instance: Instance,
    prop: str,
    policy=Policy.OR,
    max_len: Optional[int] = None,
    path: Optional[Sequence[int]] = None,
) -> PropertyReport:
    """Dispatch to the oracle checker named by prop."""
    if prop not in PROPERTIES:
        raise ValueError(f"Unknown property {prop!r}, expected one of {list(PROPERTIES)}")
    depth = max_len or DEFAULT_DEPTH[prop]
    if prop == "superadditivity":
        return check_superadditivity(instance, policy, max_len=depth)
    if prop == "monotonicity":
        return check_monotonicity(instance, max_set=depth)
    if path:
        return check_path_subsequences(instance, policy, path)
    return check_subsequence_monotonicity(instance, policy, max_len=depth)


def get_tool_definition() -> Tool:
    """Get the tool definition for check_property."""
    return Tool(
        name="check_property",
        description="Exhaustively check a structural property of the recourse function: superadditivity, the monotonicity property of the demands, or subsequence monotonicity.",
        inputSchema={
            "type": "object",
            "properties": {
                **INSTANCE_PROPERTIES,
                "property": {
                    "type": "string",
                    "description": "Property to check",
                    "enum": list(PROPERTIES),
                },
                "policy": {
                    "type": "string",
                    "description": "Recourse policy (ignored for monotonicity)",
                    "enum": ["or", "dtd"],
                    "default": "or",
                },
                "max_len": {
                    "type": "integer",
                    "description": "Largest path length or set size enumerated",
                    "minimum": 1,
                    "maximum": 8,
                },
                "route": {
                    "type": "array",
                    "items": {"type": "integer"},
                    "description": "For 'subsequence': check only the subsequences of this path",
                },
                "format": {
                    "type": "string",
                    "description": "Output format",
                    "enum": ["table", "json", "summary"],
                    "default": "table",
                },
            },
            "additionalProperties": False,
            "required": ["property"],
        },
    )


async def handle_call(request: CallToolRequest) -> CallToolResult:
    """Handle the check_property tool call."""
    try:
        args = request.arguments or {}

        prop = args.get("property")
        policy = Policy.parse(args.get("policy", "or"))
        max_len = args.get("max_len")
        route = args.get("route")
        format_type = args.get("format", "table")

        instance = instance_from_arguments(args)
        report = await asyncio.to_thread(run_check, instance, prop, policy, max_len, route)

        return CallToolResult(
            content=[TextContent(type="text", text=format_report(report.to_dict(), format_type))],
            isError=False,
        )

    except Exception as e:
        logger.error(f"Error in check_property: {e}")
        return CallToolResult(
            content=[TextContent(type="text", text=f"Error: {str(e)}")],
            isError=True,
        )
