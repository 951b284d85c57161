"""
Harness tools: experiments and plots
"""

from typing import List, Optional

from pydantic import BaseModel, Field

from ..utils.base import SimModule, SimTool, ToolResult
from .experiments import (
    cdf_dominates,
    run_beamwaist_sweep,
    run_cdf_experiment,
    run_training_curves,
    sweep_trend_holds,
    write_rows,
    write_run_config,
)
from .report import emit_report


def _with_experiments(settings, **updates):
    updates = {key: value for key, value in updates.items() if value is not None}
    if not updates:
        return settings
    return settings.model_copy(update={"experiments": settings.experiments.model_copy(update=updates)})


class TrainingCurvesArguments(BaseModel):
    seed: Optional[int] = Field(None, description="Dataset and training seed")
    out: Optional[str] = Field(None, description="Output CSV path")


class TrainingCurvesTool(SimTool):
    """Tool for recording training and validation loss per dataset size"""

    name = "training_curves"
    description = "Train surrogates on each configured dataset size and write per-epoch MSE curves"
    Arguments = TrainingCurvesArguments

    def run(self, args: TrainingCurvesArguments) -> ToolResult:
        settings = self.context.settings
        write_run_config(settings, self.context.out_dir)
        result = run_training_curves(settings, self.context.out_dir, args.seed)
        result = write_rows(result, self.context.resolve(args.out, "training_curves.csv"))
        final = {int(row[3]): row[2] for row in result.rows}
        data = {"path": str(result.path), "rows": len(result.rows), "final_val_mse": final}
        return ToolResult("Training curves written", data)


class BeamwaistSweepArguments(BaseModel):
    weights: Optional[str] = Field(None, description="Surrogate weights file (trained on demand if omitted)")
    drops: Optional[int] = Field(None, ge=1, description="User drops per beam waist")
    beam_waists_um: Optional[List[float]] = Field(None, min_length=1, description="Beam waists to sweep")
    out: Optional[str] = Field(None, description="Output CSV path")


class BeamwaistSweepTool(SimTool):
    """Tool for the sum rate against VCSEL beam waist"""

    name = "sweep_beamwaist"
    description = "Evaluate dual, surrogate and uniform sum rates across beam waists"
    Arguments = BeamwaistSweepArguments

    def run(self, args: BeamwaistSweepArguments) -> ToolResult:
        settings = _with_experiments(
            self.context.settings,
            weights_path=args.weights,
            sweep_drops=args.drops,
            beam_waists_um=args.beam_waists_um,
        )
        write_run_config(settings, self.context.out_dir)
        result = run_beamwaist_sweep(settings, self.context.out_dir)
        result = write_rows(result, self.context.resolve(args.out, "beamwaist_sweep.csv"))
        data = {"path": str(result.path), "rows": result.rows, "trend_holds": sweep_trend_holds(result.rows)}
        return ToolResult("Beam-waist sweep written", data)


class SumRateCdfArguments(BaseModel):
    weights: Optional[str] = Field(None, description="Surrogate weights file (trained on demand if omitted)")
    drops: Optional[int] = Field(None, ge=1, description="Random user drops")
    out: Optional[str] = Field(None, description="Output CSV path")


class SumRateCdfTool(SimTool):
    """Tool for per-drop sum rates of every method"""

    name = "sumrate_cdf"
    description = "Sample random user drops and record the sum rate of each method for CDF plots"
    Arguments = SumRateCdfArguments

    def run(self, args: SumRateCdfArguments) -> ToolResult:
        settings = _with_experiments(self.context.settings, weights_path=args.weights, cdf_drops=args.drops)
        write_run_config(settings, self.context.out_dir)
        result = run_cdf_experiment(settings, self.context.out_dir)
        result = write_rows(result, self.context.resolve(args.out, "sumrate_cdf.csv"))
        data = {
            "path": str(result.path),
            "drops": settings.experiments.cdf_drops,
            "surrogate_dominates_uniform": cdf_dominates(result.rows),
        }
        return ToolResult("Sum-rate CDF samples written", data)


class EmitReportArguments(BaseModel):
    csv_paths: List[str] = Field(..., min_length=1, description="Experiment CSV files")
    out_dir: Optional[str] = Field(None, description="Directory for the SVG plots")


class EmitReportTool(SimTool):
    """Tool for plotting experiment CSVs"""

    name = "emit_report"
    description = "Plot experiment CSVs (training curves, beam-waist sweep, CDF) as SVG files"
    Arguments = EmitReportArguments

    def run(self, args: EmitReportArguments) -> ToolResult:
        out_dir = args.out_dir or self.context.out_dir
        paths = emit_report(args.csv_paths, out_dir)
        return ToolResult(f"Wrote {len(paths)} plots", {"plots": [str(p) for p in paths]})


class HarnessModule(SimModule):
    """Harness module containing the experiment tools"""

    def _initialize_tools(self):
        self.tools = {
            "training_curves": TrainingCurvesTool(self.context),
            "sweep_beamwaist": BeamwaistSweepTool(self.context),
            "sumrate_cdf": SumRateCdfTool(self.context),
            "emit_report": EmitReportTool(self.context),
        }
