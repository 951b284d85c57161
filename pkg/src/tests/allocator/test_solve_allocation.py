"""
Test cases for SolveAllocationTool
"""

import pytest

from owc_alloc.allocator.tools import AllocatorModule, SolveAllocationTool
from tests.base_test import BaseToolTest
from tests.test_utils import make_context

PROBLEM_TEXT = """K = 2
L = 2
rates = [[2.0, 1.0], [0.5, 3.0]]
e_min = [0.1, 0.2]
e_max = [0.5, 0.5]
capacity = [0.5, 0.4]
"""


class TestSolveAllocationTool(BaseToolTest):
    """Test cases for SolveAllocationTool"""

    tool_class = SolveAllocationTool
    tool_name = "solve_allocation"
    required = ("problem",)

    @pytest.fixture
    def tool(self, tmp_path):
        return self.make_tool(make_context(tmp_path))

    @pytest.fixture
    def problem_file(self, tmp_path):
        path = tmp_path / "problem.toml"
        path.write_text(PROBLEM_TEXT)
        return str(path)

    def test_tool_definition(self, tool):
        schema = self.check_definition(tool)
        assert schema["properties"]["method"]["enum"] == ["dual", "exhaustive", "uniform"]

    def test_missing_problem(self, tool):
        self.check_missing_arguments(tool)

    def test_dual(self, tool, problem_file, tmp_path):
        data = self.payload(self.execute(tool, {"problem": problem_file}))
        assert data["method"] == "dual"
        assert data["feasible"] is True
        assert data["trace_file"] == str(tmp_path / "solution_dual_trace.csv")
        assert data["allocation_file"] == str(tmp_path / "solution_dual_allocation.csv")

    def test_exhaustive_close_to_dual(self, tool, problem_file):
        dual = self.payload(self.execute(tool, {"problem": problem_file}))
        exhaustive = self.payload(self.execute(tool, {"problem": problem_file, "method": "exhaustive"}))
        assert dual["utility"] >= exhaustive["utility"] - 1e-2
        assert exhaustive["iterations"] == 1

    def test_iteration_limit(self, tool, problem_file, tmp_path):
        out = tmp_path / "runs" / "short_trace.csv"
        data = self.payload(self.execute(tool, {"problem": problem_file, "max_iters": 1, "out": str(out)}))
        assert data["iterations"] == 1
        assert data["trace_file"] == str(out)
        assert (tmp_path / "runs" / "short_allocation.csv").exists()

    def test_unknown_method(self, tool, problem_file):
        assert self.execute(tool, {"problem": problem_file, "method": "greedy"}).startswith("❌")

    def test_unreadable_problem(self, tool, tmp_path):
        response = self.execute(tool, {"problem": str(tmp_path / "absent.toml")})
        assert response.startswith("❌ solve_allocation failed")


def test_allocator_module_tools(tmp_path):
    assert list(AllocatorModule(make_context(tmp_path)).tools) == ["solve_allocation"]
