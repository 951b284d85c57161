"""
Test cases for problem files and solution CSVs
"""

import numpy as np
import pytest

from owc_alloc.allocator.problem import AllocationProblem
from owc_alloc.allocator.problem_io import (
    ALLOCATION_HEADER,
    TRACE_HEADER,
    read_problem,
    write_allocation_csv,
    write_problem,
    write_trace_csv,
)
from owc_alloc.allocator.solvers import solve_dual
from owc_alloc.utils.config import SolverConfig
from owc_alloc.utils.errors import InfeasibleProblemError, ParseError

PROBLEM_TEXT = """K = 2
L = 2
rates = [[2.0, 1.0], [0.5, 3.0]]
e_min = [0.1, 0.2]
e_max = [1.0, 1.0]
capacity = [1.0, 0.8]
"""


@pytest.fixture
def problem_file(tmp_path):
    path = tmp_path / "problem.toml"
    path.write_text(PROBLEM_TEXT)
    return path


class TestReadProblem:
    """TOML problem files"""

    def test_read(self, problem_file):
        problem = read_problem(problem_file)
        assert (problem.K, problem.L) == (2, 2)
        np.testing.assert_array_equal(problem.rates, [[2.0, 1.0], [0.5, 3.0]])
        np.testing.assert_array_equal(problem.weights, [1.0, 1.0])

    def test_write_then_read(self, tmp_path):
        problem = AllocationProblem(rates=[[1.5], [0.25]], e_min=[0.0, 0.1], e_max=[0.5, 0.5],
                                    capacity=[1.0], weights=[1.0, 2.0])
        loaded = read_problem(write_problem(problem, tmp_path / "p.toml"))
        np.testing.assert_array_equal(loaded.weights, problem.weights)
        np.testing.assert_array_equal(loaded.rates, problem.rates)

    def test_missing_keys(self, tmp_path):
        path = tmp_path / "p.toml"
        path.write_text("K = 1\nL = 1\n")
        with pytest.raises(ParseError, match="rates"):
            read_problem(path)

    def test_shape_mismatch(self, tmp_path):
        path = tmp_path / "p.toml"
        path.write_text(PROBLEM_TEXT.replace("K = 2", "K = 3"))
        with pytest.raises(ParseError, match="shape"):
            read_problem(path)

    def test_invalid_bounds(self, tmp_path):
        path = tmp_path / "p.toml"
        path.write_text(PROBLEM_TEXT.replace("e_min = [0.1, 0.2]", "e_min = [2.0, 0.2]"))
        with pytest.raises(ParseError, match="demand bounds"):
            read_problem(path)

    def test_infeasible(self, tmp_path):
        path = tmp_path / "p.toml"
        path.write_text(PROBLEM_TEXT.replace("e_max = [1.0, 1.0]", "e_max = [2.0, 2.0]")
                        .replace("e_min = [0.1, 0.2]", "e_min = [1.0, 1.0]"))
        with pytest.raises(InfeasibleProblemError):
            read_problem(path)

    def test_syntax_error(self, tmp_path):
        path = tmp_path / "p.toml"
        path.write_text("K = = 2\n")
        with pytest.raises(ParseError):
            read_problem(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            read_problem(tmp_path / "absent.toml")


class TestSolutionCsv:
    def test_trace(self, problem_file, tmp_path):
        solution = solve_dual(read_problem(problem_file), SolverConfig(max_iters=20))
        path = write_trace_csv(solution, tmp_path / "trace.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(TRACE_HEADER)
        assert len(lines) == 1 + len(solution.trace)
        assert lines[1].startswith("0,")

    def test_allocation(self, problem_file, tmp_path):
        problem = read_problem(problem_file)
        solution = solve_dual(problem, SolverConfig(max_iters=20))
        lines = write_allocation_csv(solution, problem, tmp_path / "e.csv").read_text().splitlines()
        assert lines[0] == ",".join(ALLOCATION_HEADER)
        assert len(lines) == 1 + 4
        assert lines[4].startswith("1,1,")
        assert float(lines[4].split(",")[3]) == 3.0
