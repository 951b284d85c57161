"""
Random scenarios (user drops with requirements) and solver-labeled datasets
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import tomlkit
from tomlkit.exceptions import ParseError as TomlParseError

from ..allocator.problem import AllocationProblem, is_feasible
from ..allocator.solvers import solve_dual
from ..bia.rates import rate_matrix
from ..channel.model import DetectorParams, VcselParams, ap_grid, build_topology, channel_matrices, coverage_radius
from ..utils.config import Settings
from ..utils.errors import InfeasibleProblemError, InvalidParameterError, OwcAllocError, ParseError
from ..utils.parallel import map_ordered
from .store import Dataset, DatasetLayout

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Scenario:
    """One user drop: positions, requirements, capacities and the resulting rates"""

    seed: int
    beam_waist_um: float
    user_xy: np.ndarray
    e_min: np.ndarray
    e_max: np.ndarray
    weights: np.ndarray
    capacity: np.ndarray
    rates: np.ndarray

    @property
    def K(self) -> int:
        return len(self.e_min)

    @property
    def L(self) -> int:
        return len(self.capacity)

    def problem(self) -> AllocationProblem:
        return AllocationProblem(
            rates=self.rates, e_min=self.e_min, e_max=self.e_max,
            capacity=self.capacity, weights=self.weights,
        )


def sample_seeds(seed: int, n: int) -> List[int]:
    """Per-sample seeds; the first n are the same for every larger n"""
    return [int(child.generate_state(1)[0]) for child in np.random.SeedSequence(seed).spawn(n)]


def place_users(rng: np.random.Generator, settings: Settings, beam_waist_um: float) -> np.ndarray:
    """
    Receiving-plane coordinates of K users, shape (K, 2)

    uniform (default): independent uniform draws over the whole plane.
    coverage: AP index, normalized radius and angle are drawn first and then
    scaled by the coverage radius of the beam waist, so one seed gives
    comparable drops for every beam waist.
    """
    room = settings.room
    K = room.users
    if settings.dataset.placement == "uniform":
        return np.column_stack([
            rng.uniform(0.0, room.width_m, K),
            rng.uniform(0.0, room.depth_m, K),
        ])

    aps = ap_grid(room)
    ap_index = rng.integers(0, len(aps), K)
    radial = np.sqrt(rng.random(K))
    angle = rng.uniform(0.0, 2.0 * math.pi, K)

    channel = settings.channel.model_copy(update={"beam_waist_um": beam_waist_um})
    r_c = coverage_radius(
        VcselParams.from_config(channel),
        DetectorParams.from_config(channel),
        room.plane_gap_m,
        settings.bia.stream_power,
        K,
        settings.bia.coverage_snr_db,
        channel.axial_literal,
    )
    xy = aps[ap_index, :2] + (r_c * radial)[:, None] * np.column_stack([np.cos(angle), np.sin(angle)])
    return np.clip(xy, 0.0, [room.width_m, room.depth_m])


def compute_rates(settings: Settings, user_xy: np.ndarray, beam_waist_um: Optional[float] = None) -> np.ndarray:
    """K x L per-link rate matrix for users at the given coordinates"""
    channel = settings.channel
    if beam_waist_um is not None:
        channel = channel.model_copy(update={"beam_waist_um": beam_waist_um})
    topology = build_topology(settings.room, DetectorParams.from_config(channel), user_xy)
    channels = channel_matrices(topology, VcselParams.from_config(channel), strict=False, literal=channel.axial_literal)
    return rate_matrix(channels, settings.bia.stream_power)


def _sample_requirements(rng: np.random.Generator, settings: Settings):
    cfg = settings.dataset
    K, L = settings.room.users, settings.room.n_aps
    e_max = rng.uniform(cfg.e_max_low, cfg.e_max_high, K)
    e_min = rng.uniform(cfg.e_min_low, np.maximum(cfg.e_min_low, cfg.e_min_high_fraction * e_max))
    e_min = np.minimum(e_min, e_max)
    capacity = (K / L) * rng.uniform(cfg.capacity_low, cfg.capacity_high, L)
    if cfg.randomize_weights:
        weights = rng.uniform(cfg.weight_low, cfg.weight_high, K)
    else:
        weights = np.ones(K)
    return e_min, e_max, weights, capacity


def sample_scenario(rng_seed: int, settings: Settings) -> Scenario:
    """
    Draw one scenario

    Infeasible draws (sum of e_min above total capacity) and draws where two
    users share identical requirements are redrawn up to max_retries times.
    """
    rng = np.random.default_rng(rng_seed)
    beam_waists = settings.dataset.beam_waists_um
    beam_waist = float(rng.choice(beam_waists)) if beam_waists else settings.channel.beam_waist_um

    for _ in range(settings.dataset.max_retries):
        user_xy = place_users(rng, settings, beam_waist)
        e_min, e_max, weights, capacity = _sample_requirements(rng, settings)

        requirements = np.column_stack([e_min, e_max, weights])
        if len(np.unique(requirements, axis=0)) < len(requirements):
            continue
        if e_min.sum() > capacity.sum():
            continue

        return Scenario(
            seed=rng_seed,
            beam_waist_um=beam_waist,
            user_xy=user_xy,
            e_min=e_min,
            e_max=e_max,
            weights=weights,
            capacity=capacity,
            rates=compute_rates(settings, user_xy, beam_waist),
        )

    raise InfeasibleProblemError(
        f"no feasible scenario after {settings.dataset.max_retries} draws (seed {rng_seed})"
    )


def problem_features(problem: AllocationProblem) -> np.ndarray:
    """Feature vector [e_min, e_max, xi, rho, vec(r)]"""
    return np.concatenate([problem.e_min, problem.e_max, problem.weights, problem.capacity, problem.rates.ravel()])


def _label_sample(job: Tuple[int, Settings]) -> Optional[Tuple[np.ndarray, np.ndarray, int]]:
    seed, settings = job
    try:
        problem = sample_scenario(seed, settings).problem()
        solution = solve_dual(problem, settings.solver)
    except OwcAllocError as e:
        logger.warning(f"Dropped sample {seed}: {e}")
        return None
    if not is_feasible(solution.e, problem):
        logger.warning(f"Dropped sample {seed}: dual solution is infeasible")
        return None
    return problem_features(problem), solution.e.ravel(), seed


def generate_dataset(
    n: int,
    settings: Settings,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> Dataset:
    """Label n random scenarios with the dual solver"""
    if n < 1:
        raise InvalidParameterError(f"dataset size must be at least 1, got {n}")
    seed = settings.seed if seed is None else seed
    workers = settings.dataset.workers if workers is None else workers

    jobs = [(s, settings) for s in sample_seeds(seed, n)]
    results = [r for r in map_ordered(_label_sample, jobs, workers) if r is not None]
    dropped = n - len(results)
    if not results:
        raise InfeasibleProblemError(f"all {n} samples were dropped")
    if dropped:
        logger.warning(f"Dataset shortfall: {dropped} of {n} samples dropped")

    layout = DatasetLayout(K=settings.room.users, L=settings.room.n_aps)
    features, labels, seeds = zip(*results)
    dataset = Dataset.from_samples(layout, np.vstack(features), np.vstack(labels), np.array(seeds), dropped=dropped)
    logger.info(f"Generated dataset with {dataset.size} samples (K={layout.K}, L={layout.L})")
    return dataset


def scenario_to_toml(scenario: Scenario) -> str:
    document = tomlkit.document()
    document.add("seed", scenario.seed)
    document.add("beam_waist_um", float(scenario.beam_waist_um))
    document.add("users", [[float(x), float(y)] for x, y in scenario.user_xy])
    for key in ("e_min", "e_max", "weights", "capacity"):
        document.add(key, [float(v) for v in getattr(scenario, key)])
    document.add("rates", [[float(v) for v in row] for row in scenario.rates])
    return tomlkit.dumps(document)


def write_scenario(scenario: Scenario, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(scenario_to_toml(scenario), encoding="utf-8")
    return path


def read_scenario(path: Union[str, Path], settings: Optional[Settings] = None) -> Scenario:
    """
    Read a scenario file

    When rates are missing they are computed from the user positions with
    the given settings.
    """
    try:
        data = tomlkit.parse(Path(path).read_text(encoding="utf-8")).unwrap()
    except OSError as e:
        raise ParseError(f"cannot read scenario file: {e}", path=str(path)) from e
    except TomlParseError as e:
        raise ParseError(str(e), path=str(path), line=getattr(e, "line", None)) from e

    missing = [key for key in ("users", "e_min", "e_max", "capacity") if key not in data]
    if missing:
        raise ParseError(f"missing keys: {', '.join(missing)}", path=str(path))

    try:
        user_xy = np.array(data["users"], dtype=float).reshape(-1, 2)
        e_min = np.array(data["e_min"], dtype=float)
        e_max = np.array(data["e_max"], dtype=float)
        capacity = np.array(data["capacity"], dtype=float)
        weights = np.array(data.get("weights", np.ones(len(e_min))), dtype=float)
    except (TypeError, ValueError) as e:
        raise ParseError(f"non-numeric scenario values: {e}", path=str(path)) from e

    beam_waist = float(data.get("beam_waist_um", settings.channel.beam_waist_um if settings else 10.0))
    if "rates" in data:
        rates = np.array(data["rates"], dtype=float)
    elif settings is not None:
        rates = compute_rates(settings, user_xy, beam_waist)
    else:
        raise ParseError("rates missing and no settings given to compute them", path=str(path))

    return Scenario(
        seed=int(data.get("seed", 0)),
        beam_waist_um=beam_waist,
        user_xy=user_xy,
        e_min=e_min,
        e_max=e_max,
        weights=weights,
        capacity=capacity,
        rates=rates,
    )
