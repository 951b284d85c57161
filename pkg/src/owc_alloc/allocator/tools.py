"""
Allocator tools: solve problem files
"""

import logging
from typing import Literal, Optional

from pydantic import BaseModel, Field

from ..utils.base import SimModule, SimTool, ToolResult
from .problem import sum_rate
from .problem_io import read_problem, write_allocation_csv, write_trace_csv
from .solvers import solve

logger = logging.getLogger(__name__)


class SolveAllocationArguments(BaseModel):
    problem: str = Field(..., description="Path of the TOML problem file")
    method: Literal["dual", "exhaustive", "uniform"] = Field("dual", description="Solver")
    tol: Optional[float] = Field(None, gt=0, description="Relative violation tolerance of the dual solver")
    max_iters: Optional[int] = Field(None, ge=1, description="Iteration limit of the dual solver")
    grid_step: Optional[float] = Field(None, gt=0, description="Grid resolution of the exhaustive search")
    out: Optional[str] = Field(None, description="Trace CSV path (allocation CSV is written next to it)")


class SolveAllocationTool(SimTool):
    """Tool for solving an allocation problem file"""

    name = "solve_allocation"
    description = "Solve a resource allocation problem file with the dual, exhaustive or uniform method"
    Arguments = SolveAllocationArguments

    def run(self, args: SolveAllocationArguments) -> ToolResult:
        problem = read_problem(args.problem)
        updates = {
            key: value
            for key, value in (("tol_rel", args.tol), ("max_iters", args.max_iters), ("grid_step", args.grid_step))
            if value is not None
        }
        cfg = self.context.settings.solver.model_copy(update=updates)

        solution = solve(problem, args.method, cfg)
        if not solution.converged:
            logger.warning(f"Solver did not converge: {solution.diagnostic}")

        trace_path = self.context.resolve(args.out, f"solution_{args.method}_trace.csv")
        allocation_path = trace_path.with_name(trace_path.stem.replace("_trace", "") + "_allocation.csv")
        write_trace_csv(solution, trace_path)
        write_allocation_csv(solution, problem, allocation_path)

        data = {
            "method": solution.method,
            "utility": solution.utility,
            "sum_rate": sum_rate(solution.e, problem),
            "feasible": solution.feasible,
            "converged": solution.converged,
            "iterations": len(solution.trace),
            "e": solution.e,
            "trace_file": str(trace_path),
            "allocation_file": str(allocation_path),
        }
        if solution.diagnostic:
            data["diagnostic"] = solution.diagnostic
        return ToolResult(f"Solved {problem.K}x{problem.L} problem with method '{args.method}'", data)


class AllocatorModule(SimModule):
    """Allocator module containing the solver tools"""

    def _initialize_tools(self):
        self.tools = {
            "solve_allocation": SolveAllocationTool(self.context),
        }
