"""
Solve instance tool
"""

import asyncio
import json
import logging

from mcp.types import CallToolRequest, CallToolResult, Tool, TextContent

from ..core.recourse import Policy
from ..core.solver import solve
from ..utils.arguments import INSTANCE_PROPERTIES, instance_from_arguments, solver_options
from ..utils.formatters import format_solution

logger = logging.getLogger(__name__)


def get_tool_definition() -> Tool:
    """Get the tool definition for solve_instance."""
    return Tool(
        name="solve_instance",
        description="Solve a VRP with stochastic demands to optimality with DL-shaped branch-and-cut (P-, S- and E-cuts) or the classic single-variable baseline.",
        inputSchema={
            "type": "object",
            "properties": {
                **INSTANCE_PROPERTIES,
                "policy": {
                    "type": "string",
                    "description": "Recourse policy: optimal restocking or detour-to-depot",
                    "enum": ["or", "dtd"],
                    "default": "or",
                },
                "time_limit": {
                    "type": "number",
                    "description": "Wall-clock limit in seconds",
                    "minimum": 0,
                },
                "node_limit": {
                    "type": "integer",
                    "description": "Maximum number of search nodes",
                    "minimum": 1,
                },
                "e_cuts": {
                    "type": "boolean",
                    "description": "Separate E-cuts",
                    "default": True,
                },
                "s_cuts": {
                    "type": "boolean",
                    "description": "Separate S-cuts and seed the initial S-cut pool",
                    "default": True,
                },
                "classic": {
                    "type": "boolean",
                    "description": "Use the classic single-variable optimality cut (fixed fleet size only)",
                    "default": False,
                },
                "check_superadditivity": {
                    "type": "integer",
                    "description": "Verify superadditivity up to this concatenation length before solving",
                    "minimum": 2,
                    "maximum": 8,
                },
                "force": {
                    "type": "boolean",
                    "description": "Solve even when the superadditivity check fails",
                    "default": False,
                },
                "format": {
                    "type": "string",
                    "description": "Output format",
                    "enum": ["table", "json", "summary"],
                    "default": "table",
                },
            },
            "additionalProperties": False,
            "required": [],
        },
    )


async def handle_call(request: CallToolRequest) -> CallToolResult:
    """Handle the solve_instance tool call."""
    try:
        args = request.arguments or {}

        policy = Policy.parse(args.get("policy", "or"))
        format_type = args.get("format", "table")
        instance = instance_from_arguments(args)
        options = solver_options(args)

        solution = await asyncio.to_thread(solve, instance, None, policy, options)
        document = solution.to_dict()

        if format_type == "json":
            content = json.dumps(document, indent=2)
        else:
            content = format_solution(document, format_type)

        return CallToolResult(
            content=[TextContent(type="text", text=content)],
            isError=False,
        )

    except Exception as e:
        logger.error(f"Error in solve_instance: {e}")
        return CallToolResult(
            content=[TextContent(type="text", text=f"Error: {str(e)}")],
            isError=True,
        )
