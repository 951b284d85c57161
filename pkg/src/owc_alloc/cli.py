"""
owc-alloc command line

Every subcommand runs the same tool object the server exposes.
"""

import asyncio
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Type

import typer
from rich.console import Console
from rich.logging import RichHandler

from .allocator.tools import SolveAllocationTool
from .bia.tools import VerifyBiaTool
from .channel.tools import ComputeChannelTool
from .dataset.tools import GenerateDatasetTool, SampleScenarioTool
from .harness.tools import BeamwaistSweepTool, EmitReportTool, SumRateCdfTool, TrainingCurvesTool
from .server import SimulationServer
from .surrogate.tools import PredictAllocationTool, TrainSurrogateTool
from .utils.base import SimTool, SimulationContext, format_error_response, format_success_response
from .utils.config import load_settings
from .utils.errors import OwcAllocError

app = typer.Typer(name="owc-alloc", help="VCSEL optical wireless allocation simulator", no_args_is_help=True)
console = Console(stderr=True)


def _setup_logging(level: str):
    logging.basicConfig(
        level=level.upper(),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, rich_tracebacks=True, show_path=False)],
        force=True,
    )


@app.callback()
def main(
    ctx: typer.Context,
    config: Optional[Path] = typer.Option(None, "--config", help="TOML configuration file"),
    profile: Optional[str] = typer.Option(None, "--profile", help="Scenario preset (office, desk, quick)"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Master seed"),
    out_dir: Optional[Path] = typer.Option(None, "--out-dir", help="Output directory"),
    log_level: Optional[str] = typer.Option(None, "--log-level", help="Logging level"),
):
    overrides: Dict[str, Any] = {}
    if seed is not None:
        overrides["seed"] = seed
    if log_level is not None:
        overrides["log_level"] = log_level
    try:
        settings = load_settings(str(config) if config else None, profile, overrides)
    except OwcAllocError as e:
        console.print(format_error_response("Invalid configuration", str(e)), markup=False)
        raise typer.Exit(1)
    _setup_logging(settings.log_level)
    ctx.obj = SimulationContext(settings, str(out_dir) if out_dir else None)


def _run(ctx: typer.Context, tool_class: Type[SimTool], **arguments):
    tool = tool_class(ctx.obj)
    arguments = {key: value for key, value in arguments.items() if value is not None}
    try:
        result = tool.run(tool.parse_arguments(arguments))
    except OwcAllocError as e:
        console.print(format_error_response(f"{tool.name} failed", str(e)), markup=False)
        raise typer.Exit(1)
    typer.echo(format_success_response(result.message, result.data))


@app.command("channel")
def channel(
    ctx: typer.Context,
    user: Optional[List[str]] = typer.Option(None, "--user", help="User position as x,y in meters (repeatable)"),
    beam_waist_um: Optional[float] = typer.Option(None, "--beam-waist-um"),
    strict: bool = typer.Option(False, "--strict", help="Fail on rank-deficient channel matrices"),
):
    """Compute per-user channel matrices."""
    users = None
    if user:
        try:
            users = [tuple(float(v) for v in item.split(",")) for item in user]
        except ValueError:
            console.print(format_error_response("Invalid --user", "expected x,y"), markup=False)
            raise typer.Exit(1)
    _run(ctx, ComputeChannelTool, users=users, beam_waist_um=beam_waist_um, strict=strict)


@app.command("verify-bia")
def verify_bia(
    ctx: typer.Context,
    n_aps: int = typer.Option(2, "--L", help="Number of APs"),
    n_users: int = typer.Option(3, "--K", help="Number of users"),
    draws: int = typer.Option(100, "--draws"),
    noise_std: float = typer.Option(0.0, "--noise-std"),
    plan_out: Optional[Path] = typer.Option(None, "--plan-out", help="Write the slot table here"),
):
    """Build a BIA supersymbol and decode random transmissions."""
    _run(ctx, VerifyBiaTool, L=n_aps, K=n_users, draws=draws, noise_std=noise_std,
         plan_out=str(plan_out) if plan_out else None)


@app.command("solve")
def solve(
    ctx: typer.Context,
    problem: Path = typer.Argument(..., help="TOML problem file"),
    method: str = typer.Option("dual", "--method", help="dual, exhaustive or uniform"),
    tol: Optional[float] = typer.Option(None, "--tol"),
    max_iters: Optional[int] = typer.Option(None, "--max-iters"),
    grid_step: Optional[float] = typer.Option(None, "--grid-step"),
    out: Optional[Path] = typer.Option(None, "--out", help="Trace CSV path"),
):
    """Solve an allocation problem file."""
    _run(ctx, SolveAllocationTool, problem=str(problem), method=method, tol=tol, max_iters=max_iters,
         grid_step=grid_step, out=str(out) if out else None)


@app.command("gen-dataset")
def gen_dataset(
    ctx: typer.Context,
    n: int = typer.Option(..., "--n", help="Number of scenarios"),
    out: Optional[Path] = typer.Option(None, "--out"),
    workers: Optional[int] = typer.Option(None, "--workers"),
):
    """Generate a solver-labeled dataset."""
    _run(ctx, GenerateDatasetTool, n=n, out=str(out) if out else None, workers=workers)


@app.command("scenario")
def scenario(
    ctx: typer.Context,
    seed: int = typer.Argument(..., help="Scenario seed"),
    out: Optional[Path] = typer.Option(None, "--out"),
):
    """Draw one scenario file for predict."""
    _run(ctx, SampleScenarioTool, seed=seed, out=str(out) if out else None)


@app.command("train")
def train(
    ctx: typer.Context,
    dataset: Path = typer.Option(..., "--dataset", help="Dataset CSV"),
    arch: Optional[str] = typer.Option(None, "--arch"),
    epochs: Optional[int] = typer.Option(None, "--epochs"),
    lr: Optional[float] = typer.Option(None, "--lr"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed for initialization and shuffling"),
    out: Optional[Path] = typer.Option(None, "--out", help="Weights file"),
):
    """Train the surrogate network."""
    _run(ctx, TrainSurrogateTool, dataset=str(dataset), arch=arch, epochs=epochs, lr=lr, seed=seed,
         out=str(out) if out else None)


@app.command("predict")
def predict(
    ctx: typer.Context,
    weights: Path = typer.Option(..., "--weights", help="Weights file"),
    scenario_path: Path = typer.Option(..., "--scenario", help="Scenario TOML file"),
    refine: Optional[int] = typer.Option(None, "--refine"),
):
    """Predict a feasible allocation with a trained surrogate."""
    _run(ctx, PredictAllocationTool, weights=str(weights), scenario=str(scenario_path), refine=refine)


@app.command("training-curves")
def training_curves(ctx: typer.Context, out: Optional[Path] = typer.Option(None, "--out")):
    """Per-epoch MSE curves for every dataset size."""
    _run(ctx, TrainingCurvesTool, out=str(out) if out else None)


@app.command("sweep-beamwaist")
def sweep_beamwaist(
    ctx: typer.Context,
    weights: Optional[Path] = typer.Option(None, "--weights"),
    drops: Optional[int] = typer.Option(None, "--drops"),
    out: Optional[Path] = typer.Option(None, "--out"),
):
    """Sum rate against beam waist for every method."""
    _run(ctx, BeamwaistSweepTool, weights=str(weights) if weights else None, drops=drops,
         out=str(out) if out else None)


@app.command("cdf")
def cdf(
    ctx: typer.Context,
    weights: Optional[Path] = typer.Option(None, "--weights"),
    drops: Optional[int] = typer.Option(None, "--drops"),
    out: Optional[Path] = typer.Option(None, "--out"),
):
    """Per-drop sum rates for the CDF comparison."""
    _run(ctx, SumRateCdfTool, weights=str(weights) if weights else None, drops=drops,
         out=str(out) if out else None)


@app.command("report")
def report(
    ctx: typer.Context,
    csv_paths: List[Path] = typer.Argument(..., help="Experiment CSV files"),
    plots_dir: Optional[Path] = typer.Option(None, "--plots-dir"),
):
    """Plot experiment CSVs as SVG."""
    _run(ctx, EmitReportTool, csv_paths=[str(p) for p in csv_paths],
         out_dir=str(plots_dir) if plots_dir else None)


@app.command("serve")
def serve(ctx: typer.Context):
    """Run the JSON-RPC tool server on stdin/stdout."""
    asyncio.run(SimulationServer(ctx.obj).run())


def run():
    app()


if __name__ == "__main__":
    run()
