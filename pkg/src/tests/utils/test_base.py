"""
Test cases for the tool base classes, response formatting and the parallel map
"""

import asyncio
import json

import numpy as np
import pytest
from pydantic import BaseModel, Field

from owc_alloc.utils.base import (
    SimModule,
    SimTool,
    SimulationContext,
    ToolResult,
    format_error_response,
    format_success_response,
)
from owc_alloc.utils.errors import DegenerateGeometryError, InvalidParameterError, ParseError
from owc_alloc.utils.parallel import map_ordered
from tests.test_utils import desk_settings


class EchoArguments(BaseModel):
    value: float = Field(..., gt=0)
    fail: bool = False


class EchoTool(SimTool):
    name = "echo"
    description = "Echo a positive value"
    Arguments = EchoArguments

    def run(self, args: EchoArguments) -> ToolResult:
        if args.fail:
            raise DegenerateGeometryError("rank deficient", user=2)
        return ToolResult("Echoed", {"value": np.array([args.value])})


class EchoModule(SimModule):
    def _initialize_tools(self):
        self.tools = {"echo": EchoTool(self.context)}


def square(x):
    return x * x


@pytest.fixture
def context(tmp_path):
    return SimulationContext(desk_settings(), str(tmp_path / "out"))


class TestResponses:
    def test_success_with_numpy_payload(self):
        text = format_success_response("Done", {"a": np.arange(3), "b": np.float64(0.5)})
        head, _, body = text.partition("\n")
        assert head == "✅ Done"
        assert json.loads(body) == {"a": [0, 1, 2], "b": 0.5}

    def test_success_without_data(self):
        assert format_success_response("Done") == "✅ Done"

    def test_error(self):
        assert format_error_response("echo failed", "boom") == "❌ echo failed\nError: boom"


class TestSimTool:
    """Argument parsing and execution"""

    def test_parse_error_names_field(self, context):
        with pytest.raises(InvalidParameterError, match="value"):
            EchoTool(context).parse_arguments({"value": -1})

    def test_execute_success(self, context):
        text = asyncio.run(EchoTool(context).execute({"value": 2.0}))
        assert json.loads(text.partition("\n")[2]) == {"value": [2.0]}

    def test_execute_reports_domain_errors(self, context):
        text = asyncio.run(EchoTool(context).execute({"value": 2.0, "fail": True}))
        assert text == "❌ echo failed\nError: rank deficient"

    def test_definition(self, context):
        definition = EchoTool(context).get_tool_definition()
        assert definition["inputSchema"]["required"] == ["value"]
        assert "title" not in definition["inputSchema"]

    def test_module_dispatch(self, context):
        module = EchoModule(context)
        assert asyncio.run(module.call_tool("echo", {"value": 1.0})).startswith("✅")
        assert asyncio.run(module.call_tool("other", {})) == "Unknown tool: other"
        assert [d["name"] for d in module.get_enabled_tool_definitions()] == ["echo"]


class TestContext:
    def test_default_path_in_output_dir(self, context, tmp_path):
        assert context.resolve(None, "a.csv") == tmp_path / "out" / "a.csv"
        assert (tmp_path / "out").is_dir()

    def test_explicit_path_parent_created(self, context, tmp_path):
        target = tmp_path / "deep" / "dir" / "b.csv"
        assert context.resolve(str(target), "a.csv") == target
        assert target.parent.is_dir()

    def test_output_dir_from_settings(self, tmp_path):
        settings = desk_settings(experiments={"output_dir": str(tmp_path / "results")})
        assert SimulationContext(settings).out_dir == tmp_path / "results"


class TestErrors:
    def test_parse_error_location(self):
        assert str(ParseError("bad value", path="data.csv", line=4)) == "data.csv:4: bad value"
        assert str(ParseError("bad value", line=4)) == "line 4: bad value"

    def test_invalid_parameter_is_value_error(self):
        assert issubclass(InvalidParameterError, ValueError)


class TestMapOrdered:
    @pytest.mark.parametrize("workers", [1, 2])
    def test_order_preserved(self, workers):
        assert map_ordered(square, range(10), workers) == [x * x for x in range(10)]

    def test_empty(self):
        assert map_ordered(square, [], 4) == []
