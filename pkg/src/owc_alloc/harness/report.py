"""
SVG plots of experiment CSVs

Plots are presentation only; every check runs on the CSV rows. Output bytes
are reproducible: fixed SVG id salt and no date metadata.
"""

import logging
from collections import defaultdict
from pathlib import Path
from typing import Dict, List, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..utils.errors import InvalidParameterError  # noqa: E402
from .experiments import ExperimentResult, PathLike, read_rows  # noqa: E402

logger = logging.getLogger(__name__)

STYLE = {
    "svg.hashsalt": "owc-alloc",
    "svg.fonttype": "none",
    "font.size": 9,
    "figure.figsize": (5.0, 3.5),
    "axes.grid": True,
    "grid.alpha": 0.3,
}


def _plot_training(result: ExperimentResult, ax) -> None:
    curves: Dict[float, List] = defaultdict(list)
    for epoch, train_mse, val_mse, size in result.rows:
        curves[size].append((epoch, train_mse, val_mse))
    for size, points in sorted(curves.items()):
        epochs, train, val = np.array(sorted(points)).T
        line, = ax.plot(epochs, train, label=f"train N={int(size)}")
        ax.plot(epochs, val, linestyle="--", color=line.get_color(), label=f"validation N={int(size)}")
    ax.set_xlabel("epoch")
    ax.set_ylabel("MSE (normalized)")
    ax.set_yscale("log")


def _plot_sweep(result: ExperimentResult, ax) -> None:
    series: Dict[str, List] = defaultdict(list)
    for beam_waist, method, value in result.rows:
        series[method].append((beam_waist, value))
    for method, points in series.items():
        x, y = np.array(sorted(points)).T
        ax.plot(x, y, marker="o", label=method)
    ax.set_xlabel("beam waist (um)")
    ax.set_ylabel("sum rate")


def _plot_cdf(result: ExperimentResult, ax) -> None:
    series: Dict[str, List[float]] = defaultdict(list)
    for _, method, value in result.rows:
        series[method].append(value)
    for method, values in series.items():
        values = np.sort(values)
        ax.step(values, np.arange(1, len(values) + 1) / len(values), where="post", label=method)
    ax.set_xlabel("sum rate")
    ax.set_ylabel("CDF")


PLOTTERS = {
    "training_curves": _plot_training,
    "beamwaist_sweep": _plot_sweep,
    "sumrate_cdf": _plot_cdf,
}


def plot_result(result: ExperimentResult, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        try:
            PLOTTERS[result.name](result, ax)
            ax.legend(fontsize="small")
            fig.tight_layout()
            fig.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return path


def emit_report(csv_paths: Sequence[PathLike], out_dir: PathLike) -> List[Path]:
    """One SVG per experiment CSV, named after the CSV"""
    if not csv_paths:
        raise InvalidParameterError("no result files given")
    out_dir = Path(out_dir)
    written = []
    for csv_path in csv_paths:
        result = read_rows(csv_path)
        written.append(plot_result(result, out_dir / f"{Path(csv_path).stem}.svg"))
        logger.info(f"Plot of {result.name} written to {written[-1]}")
    return written
