"""
Experiment orchestration: training curves, beam-waist sweep and sum-rate CDF

Each experiment returns its rows; write_rows stores them as CSV with the
experiment's header. Drops are evaluated with map_ordered so results do not
depend on the worker count.
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..allocator.problem import sum_rate
from ..allocator.solvers import solve_dual, uniform_allocation
from ..dataset.scenario import generate_dataset, sample_scenario, sample_seeds
from ..dataset.store import Dataset, read_dataset, write_dataset
from ..surrogate.network import SurrogateModel
from ..surrogate.training import fit_surrogate, predict_and_repair
from ..surrogate.weights_io import read_weights
from ..utils.config import Settings, settings_to_toml
from ..utils.errors import InvalidParameterError, ParseError, TrainingFailureError
from ..utils.parallel import map_ordered

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

TRAINING_HEADER = ["epoch", "train_mse", "val_mse", "dataset_size"]
SWEEP_HEADER = ["beam_waist_um", "method", "sum_rate"]
CDF_HEADER = ["drop", "method", "sum_rate"]

Row = Tuple


@dataclass(frozen=True)
class ExperimentResult:
    name: str
    header: List[str]
    rows: List[Row]
    path: Optional[Path] = None


def training_settings(settings: Settings) -> Settings:
    """Settings for dataset generation; scenarios span the swept beam waists"""
    if settings.dataset.beam_waists_um:
        return settings
    dataset = settings.dataset.model_copy(update={"beam_waists_um": list(settings.experiments.beam_waists_um)})
    return settings.model_copy(update={"dataset": dataset})


def drop_settings(settings: Settings, beam_waist_um: Optional[float] = None) -> Settings:
    """Settings for evaluation drops at one fixed beam waist"""
    dataset = settings.dataset.model_copy(update={"beam_waists_um": []})
    settings = settings.model_copy(update={"dataset": dataset})
    return settings if beam_waist_um is None else settings.with_beam_waist(beam_waist_um)


def load_or_generate_dataset(settings: Settings, out_dir: Path, seed: Optional[int] = None) -> Dataset:
    """
    Dataset of max(dataset_sizes) samples, read from the cache if present

    Smaller sizes use the head of this dataset, so every size shares the
    first samples and the normalization.
    """
    seed = settings.seed if seed is None else seed
    n = max(settings.experiments.dataset_sizes)
    path = Path(settings.experiments.dataset_path or out_dir / f"dataset_seed{seed}_n{n}.csv")
    if path.exists():
        dataset = read_dataset(path)
        if dataset.size < n:
            logger.warning(f"Cached dataset {path} holds {dataset.size} of {n} samples")
        logger.info(f"Using cached dataset {path}")
        return dataset

    dataset = generate_dataset(n, training_settings(settings), seed=seed, workers=settings.experiments.workers)
    write_dataset(dataset, path)
    return dataset


def _take(dataset: Dataset, n: int) -> Dataset:
    if dataset.size < n:
        logger.warning(f"Dataset has {dataset.size} samples, fewer than the requested {n}")
        return dataset
    return dataset.head(n)


def train_surrogates(settings: Settings, out_dir: Path, seed: Optional[int] = None) -> Dict[str, SurrogateModel]:
    """
    Surrogates keyed by method name

    With a configured weights file only that model is used ("surrogate");
    otherwise one model per dataset size, "surrogate" for the largest and
    "surrogate-n<N>" for the others.
    """
    if settings.experiments.weights_path:
        return {"surrogate": read_weights(settings.experiments.weights_path)}

    seed = settings.seed if seed is None else seed
    dataset = load_or_generate_dataset(settings, out_dir, seed)
    sizes = sorted(settings.experiments.dataset_sizes)
    models = {}
    for n in sizes:
        name = "surrogate" if n == sizes[-1] else f"surrogate-n{n}"
        models[name] = fit_surrogate(_take(dataset, n), settings.surrogate, settings.dataset.train_fraction, seed)
    return models


def run_training_curves(settings: Settings, out_dir: PathLike, seed: Optional[int] = None) -> ExperimentResult:
    """Per-epoch training and validation MSE for every configured dataset size"""
    out_dir = Path(out_dir)
    seed = settings.seed if seed is None else seed
    dataset = load_or_generate_dataset(settings, out_dir, seed)

    rows = []
    for n in sorted(settings.experiments.dataset_sizes):
        try:
            model = fit_surrogate(_take(dataset, n), settings.surrogate, settings.dataset.train_fraction, seed)
        except TrainingFailureError as e:
            raise TrainingFailureError(f"dataset size {n}: {e}", last_finite_epoch=e.last_finite_epoch) from e
        rows.extend((epoch, train_mse, val_mse, n) for epoch, train_mse, val_mse in model.history)
        logger.info(f"Training curve for N={n}: final validation MSE {model.history[-1][2]:.6g}")
    return ExperimentResult("training_curves", TRAINING_HEADER, rows)


def _rate_scale(settings: Settings) -> float:
    return settings.channel.bandwidth_ghz * 1e9 if settings.experiments.absolute_rates else 1.0


def _evaluate_drop(job: Tuple[int, Settings, Dict[str, SurrogateModel]]) -> Dict[str, float]:
    seed, settings, models = job
    problem = sample_scenario(seed, settings).problem()
    scale = _rate_scale(settings)

    results = {"dual": sum_rate(solve_dual(problem, settings.solver).e, problem) * scale}
    for name, model in models.items():
        solution = predict_and_repair(model, problem, settings.solver, settings.surrogate.refine)
        results[name] = sum_rate(solution.e, problem) * scale
    results["uniform"] = sum_rate(uniform_allocation(problem).e, problem) * scale
    return results


def run_beamwaist_sweep(
    settings: Settings,
    out_dir: PathLike,
    models: Optional[Dict[str, SurrogateModel]] = None,
) -> ExperimentResult:
    """Mean sum rate per beam waist and method over sweep_drops drops (same drop seeds for every waist)"""
    out_dir = Path(out_dir)
    if models is None:
        models = train_surrogates(settings, out_dir)
    seeds = sample_seeds(settings.seed, settings.experiments.sweep_drops)

    rows = []
    for beam_waist in settings.experiments.beam_waists_um:
        point = drop_settings(settings, beam_waist)
        results = map_ordered(_evaluate_drop, [(s, point, models) for s in seeds], settings.experiments.workers)
        means = {method: float(np.mean([r[method] for r in results])) for method in results[0]}
        rows.extend((float(beam_waist), method, value) for method, value in means.items())
        logger.info(f"Beam waist {beam_waist} um: dual sum rate {means['dual']:.6g}")
    return ExperimentResult("beamwaist_sweep", SWEEP_HEADER, rows)


def run_cdf_experiment(
    settings: Settings,
    out_dir: PathLike,
    model: Optional[SurrogateModel] = None,
) -> ExperimentResult:
    """Per-drop sum rate of the dual solver, the surrogate and the uniform split"""
    out_dir = Path(out_dir)
    if model is None:
        model = train_surrogates(settings, out_dir)["surrogate"]
    seeds = sample_seeds(settings.seed, settings.experiments.cdf_drops)
    point = drop_settings(settings)

    results = map_ordered(
        _evaluate_drop, [(s, point, {"surrogate": model}) for s in seeds], settings.experiments.workers
    )
    rows = [(drop, method, value) for drop, result in enumerate(results) for method, value in result.items()]
    return ExperimentResult("sumrate_cdf", CDF_HEADER, rows)


def write_rows(result: ExperimentResult, path: PathLike) -> ExperimentResult:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(result.header)
        for row in result.rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    logger.info(f"{result.name}: {len(result.rows)} rows written to {path}")
    return ExperimentResult(result.name, result.header, result.rows, path)


def write_run_config(settings: Settings, out_dir: PathLike) -> Path:
    """Record the effective configuration next to the experiment outputs"""
    path = Path(out_dir) / "config.toml"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(settings_to_toml(settings), encoding="utf-8")
    return path


def read_rows(path: PathLike) -> ExperimentResult:
    """Read an experiment CSV back; numeric fields become floats"""
    path = Path(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot open results file: {e}", path=str(path)) from e

    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if not header:
            raise ParseError("empty results file", path=str(path), line=1)
        known = {tuple(TRAINING_HEADER): "training_curves", tuple(SWEEP_HEADER): "beamwaist_sweep",
                 tuple(CDF_HEADER): "sumrate_cdf"}
        name = known.get(tuple(header))
        if name is None:
            raise ParseError(f"unknown results header {','.join(header)}", path=str(path), line=1)

        rows = []
        for line, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError(f"row has {len(row)} fields, expected {len(header)}", path=str(path), line=line)
            try:
                rows.append(tuple(v if column == "method" else float(v) for column, v in zip(header, row)))
            except ValueError as e:
                raise ParseError(f"non-numeric value: {e}", path=str(path), line=line) from e
    if not rows:
        raise ParseError("results file has no rows", path=str(path))
    return ExperimentResult(name, header, rows, path)


def _series(rows: Sequence[Row], key_index: int, value_index: int, where) -> Dict[float, float]:
    return {row[key_index]: row[value_index] for row in rows if where(row)}


def training_trend_holds(runs: Sequence[Sequence[Row]], min_decrease: float = 0.5) -> bool:
    """
    Larger datasets validate better in most runs, and every training curve
    falls by at least min_decrease from its first to its last epoch

    runs holds the rows of one training-curves experiment per seed.
    """
    if not runs:
        raise InvalidParameterError("no training runs given")
    wins = 0
    for rows in runs:
        sizes = sorted({row[3] for row in rows})
        curves = {n: sorted((row for row in rows if row[3] == n), key=lambda row: row[0]) for n in sizes}
        for curve in curves.values():
            if curve[-1][1] > (1.0 - min_decrease) * curve[0][1]:
                return False
        small, large = _series(rows, 0, 2, lambda r: r[3] == sizes[0]), _series(rows, 0, 2, lambda r: r[3] == sizes[-1])
        matched = sorted(set(small) & set(large))
        if matched and large[matched[-1]] <= small[matched[-1]]:
            wins += 1
    return wins * 2 > len(runs)


def sweep_trend_holds(rows: Sequence[Row], rel_tol: float = 1e-9) -> bool:
    """Dual sum rate non-decreasing in the beam waist and never below uniform"""
    dual = _series(rows, 0, 2, lambda r: r[1] == "dual")
    uniform = _series(rows, 0, 2, lambda r: r[1] == "uniform")
    waists = sorted(dual)
    for before, after in zip(waists, waists[1:]):
        if dual[after] < dual[before] * (1.0 - rel_tol):
            return False
    return all(dual[w] >= uniform[w] * (1.0 - rel_tol) for w in waists if w in uniform)


def deciles(values: Sequence[float]) -> np.ndarray:
    return np.quantile(np.asarray(values, dtype=float), np.linspace(0.1, 0.9, 9))


def cdf_dominates(rows: Sequence[Row], better: str = "surrogate", worse: str = "uniform") -> bool:
    """Empirical CDF of `better` lies at or right of `worse` at every decile"""
    a = [row[2] for row in rows if row[1] == better]
    b = [row[2] for row in rows if row[1] == worse]
    if not a or not b:
        raise InvalidParameterError(f"rows hold no samples for '{better}' or '{worse}'")
    return bool(np.all(deciles(a) >= deciles(b)))
