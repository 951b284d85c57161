"""
Dataset tools: generate labeled datasets and scenario files
"""

from typing import Optional

from pydantic import BaseModel, Field

from ..utils.base import SimModule, SimTool, ToolResult
from .scenario import generate_dataset, sample_scenario, write_scenario
from .store import write_dataset


class GenerateDatasetArguments(BaseModel):
    n: int = Field(..., ge=1, description="Number of scenarios to label")
    seed: Optional[int] = Field(None, description="Dataset seed (defaults to the configured seed)")
    out: Optional[str] = Field(None, description="Output CSV path")
    workers: Optional[int] = Field(None, ge=1, description="Worker processes")


class GenerateDatasetTool(SimTool):
    """Tool for generating a solver-labeled dataset"""

    name = "generate_dataset"
    description = "Sample random scenarios, label them with the dual solver and write the dataset CSV"
    Arguments = GenerateDatasetArguments

    def run(self, args: GenerateDatasetArguments) -> ToolResult:
        settings = self.context.settings
        dataset = generate_dataset(args.n, settings, seed=args.seed, workers=args.workers)
        path = write_dataset(dataset, self.context.resolve(args.out, "dataset.csv"))
        data = {
            "path": str(path),
            "samples": dataset.size,
            "dropped": dataset.dropped,
            "K": dataset.layout.K,
            "L": dataset.layout.L,
        }
        return ToolResult(f"Generated {dataset.size} labeled samples", data)


class SampleScenarioArguments(BaseModel):
    seed: int = Field(..., description="Scenario seed")
    out: Optional[str] = Field(None, description="Output TOML path")


class SampleScenarioTool(SimTool):
    """Tool for drawing a single scenario file"""

    name = "sample_scenario"
    description = "Draw one random scenario and write it as a TOML scenario file"
    Arguments = SampleScenarioArguments

    def run(self, args: SampleScenarioArguments) -> ToolResult:
        scenario = sample_scenario(args.seed, self.context.settings)
        path = write_scenario(scenario, self.context.resolve(args.out, f"scenario_{args.seed}.toml"))
        data = {
            "path": str(path),
            "K": scenario.K,
            "L": scenario.L,
            "beam_waist_um": scenario.beam_waist_um,
        }
        return ToolResult(f"Scenario {args.seed} written", data)


class DatasetModule(SimModule):
    """Dataset module containing the dataset generation tools"""

    def _initialize_tools(self):
        self.tools = {
            "generate_dataset": GenerateDatasetTool(self.context),
            "sample_scenario": SampleScenarioTool(self.context),
        }
