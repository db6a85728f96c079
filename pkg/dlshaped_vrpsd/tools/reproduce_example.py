"""
Reproduce example tool
"""

import asyncio
import logging

from mcp.types import CallToolRequest, CallToolResult, Tool, TextContent

from ..core.reproduce import reproduction_names, run
from ..utils.formatters import format_report

logger = logging.getLogger(__name__)


def get_tool_definition() -> Tool:
    """Get the tool definition for reproduce_example."""
    return Tool(
        name="reproduce_example",
        description="Run the checked assertions attached to a built-in example instance and report pass/fail per assertion.",
        inputSchema={
            "type": "object",
            "properties": {
                "name": {
                    "type": "string",
                    "description": "Built-in example",
                    "enum": reproduction_names(),
                },
                "format": {
                    "type": "string",
                    "description": "Output format",
                    "enum": ["table", "json", "summary"],
                    "default": "table",
                },
            },
            "additionalProperties": False,
            "required": ["name"],
        },
    )


async def handle_call(request: CallToolRequest) -> CallToolResult:
    """Handle the reproduce_example tool call."""
    try:
        args = request.arguments or {}

        name = args.get("name", "")
        format_type = args.get("format", "table")

        report = await asyncio.to_thread(run, name)

        return CallToolResult(
            content=[TextContent(type="text", text=format_report(report.to_dict(), format_type))],
            isError=not report.passed,
        )

    except Exception as e:
        logger.error(f"Error in reproduce_example: {e}")
        return CallToolResult(
            content=[TextContent(type="text", text=f"Error: {str(e)}")],
            isError=True,
        )
