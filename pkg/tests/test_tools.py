"""
Tests for the individual MCP tools
"""

import json

import pytest
from unittest.mock import patch
from dlshaped_vrpsd.core.builtin_instances import SINGLE_CUSTOMER
from dlshaped_vrpsd.core.oracle import PropertyReport
from dlshaped_vrpsd.tools import check_property, evaluate_route, reproduce_example, solve_instance
from mcp.types import CallToolResult, TextContent


class TestSolveInstanceTool:
    """Tests for the solve_instance tool"""

    def test_tool_definition(self):
        """Test solve tool definition structure"""
        tool_def = solve_instance.get_tool_definition()
        assert tool_def.name == "solve_instance"
        assert "branch-and-cut" in tool_def.description
        assert "policy" in tool_def.inputSchema["properties"]
        assert "path" in tool_def.inputSchema["properties"]

    @pytest.mark.asyncio
    async def test_handler_json(self, sample_request):
        """Test solving a built-in instance to JSON"""
        sample_request.arguments = {"path": "builtin:vanishing-s-cuts", "format": "json"}

        result = await solve_instance.handle_call(sample_request)

        assert isinstance(result, CallToolResult)
        assert result.isError is False
        document = json.loads(result.content[0].text)
        assert document["objective"] == pytest.approx(5.125)
        assert document["status"] == "optimal"

    @pytest.mark.asyncio
    async def test_handler_inline_instance(self, sample_request):
        """Test an inline instance document in table format"""
        sample_request.arguments = {"instance": SINGLE_CUSTOMER}

        result = await solve_instance.handle_call(sample_request)

        assert result.isError is False
        assert isinstance(result.content[0], TextContent)
        assert "Objective: 2.000000" in result.content[0].text
        assert "0 -> 1 -> 0" in result.content[0].text

    @pytest.mark.asyncio
    async def test_handler_missing_instance(self, sample_request):
        """Test an error is returned without an instance"""
        sample_request.arguments = {}

        result = await solve_instance.handle_call(sample_request)

        assert result.isError is True
        assert result.content[0].text.startswith("Error:")
        assert "Provide either" in result.content[0].text

    @pytest.mark.asyncio
    async def test_handler_solver_failure(self, sample_request):
        """Test solver exceptions become error results"""
        sample_request.arguments = {"path": "builtin:single-customer"}

        with patch("dlshaped_vrpsd.tools.solve_instance.solve") as mock_solve:
            mock_solve.side_effect = Exception("LP failed")

            result = await solve_instance.handle_call(sample_request)

            assert result.isError is True
            assert "LP failed" in result.content[0].text


class TestEvaluateRouteTool:
    """Tests for the evaluate_route tool"""

    def test_tool_definition(self):
        """Test evaluate tool definition structure"""
        tool_def = evaluate_route.get_tool_definition()
        assert tool_def.name == "evaluate_route"
        assert tool_def.inputSchema["required"] == ["route"]

    def test_evaluate_with_simulation(self, non_monotone):
        """Test the OR document carries thresholds and a Monte-Carlo estimate"""
        document = evaluate_route.evaluate_route(non_monotone, [1, 2, 3], "or", samples=500, seed=3)
        assert document["value"] == pytest.approx(3.25, abs=0.01)
        assert document["first_stage"] == pytest.approx(44.0)
        assert document["total"] == pytest.approx(44.0 + document["value"])
        assert len(document["restock_thresholds"]) == 2
        assert document["simulation"]["samples"] == 500
        assert document["simulation"]["seed"] == 3

    def test_evaluate_detours(self, vanishing):
        """Test DTD documents have no restocking summary"""
        document = evaluate_route.evaluate_route(vanishing, [1, 3, 2, 4], "dtd")
        assert document["value"] == pytest.approx(0.125)
        assert "restock_thresholds" not in document
        assert "simulation" not in document

    @pytest.mark.asyncio
    async def test_handler_table(self, sample_request):
        """Test the table output"""
        sample_request.arguments = {"path": "builtin:non-monotone", "route": [1, 3]}

        result = await evaluate_route.handle_call(sample_request)

        assert result.isError is False
        text = result.content[0].text
        assert "Route [1, 3] under OR" in text
        assert "Restock thresholds" in text

    @pytest.mark.asyncio
    async def test_handler_invalid_route(self, sample_request):
        """Test a repeated customer is an error"""
        sample_request.arguments = {"path": "builtin:non-monotone", "route": [1, 1]}

        result = await evaluate_route.handle_call(sample_request)

        assert result.isError is True
        assert "repeats" in result.content[0].text


class TestCheckPropertyTool:
    """Tests for the check_property tool"""

    def test_tool_definition(self):
        """Test check tool definition structure"""
        tool_def = check_property.get_tool_definition()
        assert tool_def.name == "check_property"
        assert tool_def.inputSchema["properties"]["property"]["enum"] == list(check_property.PROPERTIES)

    def test_run_check_dispatch(self, non_monotone, overestimation):
        """Test each property reaches its checker"""
        assert check_property.run_check(non_monotone, "superadditivity", "or", 3).property == "superadditivity"
        assert not check_property.run_check(overestimation, "monotonicity", max_len=5).holds
        report = check_property.run_check(non_monotone, "subsequence", "or", path=[1, 2, 3])
        assert report.details["path"] == [1, 2, 3]
        assert not report.holds
        with pytest.raises(ValueError):
            check_property.run_check(non_monotone, "convexity")

    @pytest.mark.asyncio
    async def test_handler_json(self, sample_request):
        """Test a JSON report for the square"""
        sample_request.arguments = {
            "path": "builtin:vanishing-s-cuts",
            "property": "superadditivity",
            "max_len": 4,
            "format": "json",
        }

        result = await check_property.handle_call(sample_request)

        assert result.isError is False
        document = json.loads(result.content[0].text)
        assert document["status"] == "holds"
        assert document["policy"] == "or"

    @pytest.mark.asyncio
    async def test_handler_violation_is_not_an_error(self, sample_request):
        """Test a violated property is reported, not raised"""
        sample_request.arguments = {"path": "builtin:non-monotone", "property": "subsequence", "route": [1, 2, 3]}

        result = await check_property.handle_call(sample_request)

        assert result.isError is False
        assert "subsequence: violated" in result.content[0].text
        assert "witness:" in result.content[0].text

    @pytest.mark.asyncio
    async def test_handler_mocked_checker(self, sample_request):
        """Test the handler formats whatever the checker returns"""
        sample_request.arguments = {"path": "builtin:single-customer", "property": "monotonicity", "format": "summary"}

        with patch("dlshaped_vrpsd.tools.check_property.check_monotonicity") as mock_check:
            mock_check.return_value = PropertyReport(property="monotonicity", policy=None, checked=7)

            result = await check_property.handle_call(sample_request)

            assert result.content[0].text == "monotonicity: holds (7 checks)"
            mock_check.assert_called_once()


class TestReproduceExampleTool:
    """Tests for the reproduce_example tool"""

    def test_tool_definition(self):
        """Test reproduce tool definition structure"""
        tool_def = reproduce_example.get_tool_definition()
        assert tool_def.name == "reproduce_example"
        assert "non-monotone" in tool_def.inputSchema["properties"]["name"]["enum"]

    @pytest.mark.asyncio
    async def test_handler_passes(self, sample_request):
        """Test a passing reproduction"""
        sample_request.arguments = {"name": "non-monotone", "format": "summary"}

        result = await reproduce_example.handle_call(sample_request)

        assert result.isError is False
        assert result.content[0].text == "non-monotone: pass"

    @pytest.mark.asyncio
    async def test_handler_unknown_name(self, sample_request):
        """Test an unknown reproduction"""
        sample_request.arguments = {"name": "nothing"}

        result = await reproduce_example.handle_call(sample_request)

        assert result.isError is True
        assert "No reproduction named" in result.content[0].text
