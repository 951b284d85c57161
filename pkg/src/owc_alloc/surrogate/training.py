"""
Surrogate training (mini-batch SGD with momentum on normalized MSE) and
online prediction with feasibility repair
"""

import logging
import math
from dataclasses import replace
from typing import Optional, Tuple

import numpy as np

from ..allocator.problem import (
    AllocationProblem,
    AllocationSolution,
    MultiplierState,
    StepSchedule,
    make_solution,
    repair_allocation,
    utility,
)
from ..allocator.solvers import best_response_all, update_multipliers
from ..dataset.scenario import problem_features
from ..dataset.store import Dataset, split_dataset
from ..utils.config import SolverConfig, SurrogateConfig
from ..utils.errors import ConfigurationError, InvalidParameterError, NumericError, TrainingFailureError
from .network import Params, SurrogateModel, compute_gradients, forward, init_model, mse_loss, parse_arch

logger = logging.getLogger(__name__)

IPF_ITERATIONS = 100
PRIOR_FLOOR = 1e-12


def raw_targets(dataset: Dataset, output_layout: str) -> np.ndarray:
    """Training targets in raw units: K*L allocations or K user totals followed by L AP totals"""
    if output_layout == "full":
        return dataset.labels
    if output_layout == "totals":
        e = dataset.labels.reshape(-1, dataset.layout.K, dataset.layout.L)
        return np.hstack([e.sum(axis=2), e.sum(axis=1)])
    raise ConfigurationError(f"unknown output layout '{output_layout}'", key="surrogate.output_layout")


def output_size(dataset: Dataset, output_layout: str) -> int:
    K, L = dataset.layout.K, dataset.layout.L
    return K * L if output_layout == "full" else K + L


def build_model(dataset: Dataset, cfg: SurrogateConfig, rng_seed: int = 0) -> SurrogateModel:
    """Untrained model for a dataset layout, carrying the dataset's normalization"""
    targets = raw_targets(dataset, cfg.output_layout)
    specs = parse_arch(cfg.arch, output_size(dataset, cfg.output_layout))
    return init_model(
        specs,
        dataset.layout.n_features,
        rng_seed,
        K=dataset.layout.K,
        L=dataset.layout.L,
        output_layout=cfg.output_layout,
        feature_min=dataset.feature_min,
        feature_max=dataset.feature_max,
        target_min=targets.min(axis=0),
        target_max=targets.max(axis=0),
    )


def _normalized(model: SurrogateModel, dataset: Dataset) -> Tuple[np.ndarray, np.ndarray]:
    if dataset.layout.n_features != model.input_dim:
        raise ConfigurationError(
            f"dataset has {dataset.layout.n_features} features, model expects {model.input_dim}",
            key="surrogate.arch",
        )
    x = model.normalize_inputs(dataset.features)
    y = raw_targets(dataset, model.output_layout)
    if model.target_min is not None:
        span = np.where(model.target_max > model.target_min, model.target_max - model.target_min, 1.0)
        y = (y - model.target_min) / span
    return x, y


def evaluate(model: SurrogateModel, dataset: Dataset) -> float:
    """Normalized MSE of the model on a dataset"""
    x, y = _normalized(model, dataset)
    _, out = forward(model, x)
    return mse_loss(out, y)


def train(
    model: SurrogateModel,
    train_set: Dataset,
    val_set: Dataset,
    cfg: Optional[SurrogateConfig] = None,
    rng_seed: int = 0,
) -> SurrogateModel:
    """
    Mini-batch SGD with momentum for cfg.epochs epochs

    The returned model carries the weights with the lowest validation MSE
    and the per-epoch history (epoch, train_mse, val_mse).
    """
    cfg = cfg or SurrogateConfig()
    x_train, y_train = _normalized(model, train_set)
    x_val, y_val = _normalized(model, val_set)
    rng = np.random.default_rng(rng_seed)

    params: Params = [(W.copy(), b.copy()) for W, b in model.params]
    velocity: Params = [(np.zeros_like(W), np.zeros_like(b)) for W, b in params]
    current = replace(model, params=params)
    best_params, best_val = params, math.inf
    history = []

    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(x_train))
        try:
            for start in range(0, len(order), cfg.batch_size):
                batch = order[start:start + cfg.batch_size]
                _, grads = compute_gradients(current, x_train[batch], y_train[batch])
                for (W, b), (vW, vb), (dW, db) in zip(params, velocity, grads):
                    vW *= cfg.momentum
                    vW -= cfg.learning_rate * dW
                    vb *= cfg.momentum
                    vb -= cfg.learning_rate * db
                    W += vW
                    b += vb
            train_mse = mse_loss(forward(current, x_train)[1], y_train)
            val_mse = mse_loss(forward(current, x_val)[1], y_val)
        except NumericError as e:
            raise TrainingFailureError(f"training diverged in epoch {epoch}: {e}", last_finite_epoch=epoch - 1) from e
        if not (math.isfinite(train_mse) and math.isfinite(val_mse)):
            raise TrainingFailureError(f"loss is not finite in epoch {epoch}", last_finite_epoch=epoch - 1)

        history.append((epoch, train_mse, val_mse))
        if val_mse < best_val:
            best_val = val_mse
            best_params = [(W.copy(), b.copy()) for W, b in params]
        logger.debug(f"Epoch {epoch}: train {train_mse:.6g}, validation {val_mse:.6g}")

    logger.info(f"Training finished after {cfg.epochs} epochs, best validation MSE {best_val:.6g}")
    return model.with_params(best_params, history=history)


def fit_surrogate(
    dataset: Dataset,
    cfg: SurrogateConfig,
    train_fraction: float = 0.9,
    rng_seed: int = 0,
) -> SurrogateModel:
    """Split, build and train a surrogate on one dataset"""
    train_set, val_set = split_dataset(dataset, train_fraction, rng_seed)
    model = build_model(dataset, cfg, rng_seed)
    return train(model, train_set, val_set, cfg, rng_seed)


def expand_totals(
    user_totals: np.ndarray,
    ap_totals: np.ndarray,
    problem: AllocationProblem,
    iterations: int = IPF_ITERATIONS,
) -> np.ndarray:
    """
    K x L allocation with the given row and column sums

    Iterative proportional fitting of the rate-weighted prior xi_k r[k, l];
    column targets are rescaled to the row total first.
    """
    rows = np.clip(np.asarray(user_totals, dtype=float), 0.0, None)
    cols = np.clip(np.asarray(ap_totals, dtype=float), 0.0, None)
    if cols.sum() > 0:
        cols = cols * rows.sum() / cols.sum()

    e = problem.weights[:, None] * problem.rates + PRIOR_FLOOR
    for _ in range(iterations):
        col_sums = e.sum(axis=0)
        e *= np.divide(cols, col_sums, out=np.zeros_like(cols), where=col_sums > 0)[None, :]
        e += PRIOR_FLOOR
        row_sums = e.sum(axis=1)
        e *= np.divide(rows, row_sums, out=np.zeros_like(rows), where=row_sums > 0)[:, None]
    return e


def _allocation_estimate(model: SurrogateModel, problem: AllocationProblem) -> np.ndarray:
    features = problem_features(problem)
    if features.size != model.input_dim or (model.K and (model.K, model.L) != (problem.K, problem.L)):
        raise ConfigurationError(
            f"model was trained for K={model.K}, L={model.L} but the problem has K={problem.K}, L={problem.L}",
            key="surrogate",
        )
    out = model.predict(features)
    if model.output_layout == "totals":
        return expand_totals(out[:problem.K], out[problem.K:], problem)
    return out.reshape(problem.K, problem.L)


def warm_start_state(e: np.ndarray, problem: AllocationProblem, schedule=None) -> MultiplierState:
    """AP multipliers from the marginal utility of the allocated links"""
    weighted = problem.weights[:, None] * problem.rates
    marginal = weighted / (1.0 + weighted * e)
    used = (e > 0) & (weighted > 0)
    counts = used.sum(axis=0)
    lam = np.where(counts > 0, np.where(used, marginal, 0.0).sum(axis=0) / np.maximum(counts, 1), 0.1)
    return MultiplierState(
        lam=lam,
        eta1=np.zeros(problem.K),
        eta2=np.zeros(problem.K),
        schedule=schedule or StepSchedule(),
    )


def predict_and_repair(
    model: SurrogateModel,
    problem: AllocationProblem,
    solver_cfg: Optional[SolverConfig] = None,
    refine: int = 5,
) -> AllocationSolution:
    """
    Allocation for a new problem in constant time

    The network estimate is repaired onto the feasible set, then refined by
    a few best-response/multiplier iterations warm-started from it; the best
    repaired point is returned.
    """
    if refine < 0:
        raise InvalidParameterError(f"refine must be nonnegative, got {refine}")
    solver_cfg = solver_cfg or SolverConfig()

    estimate = _allocation_estimate(model, problem)
    best = repair_allocation(estimate, problem)
    best_utility = utility(best, problem)

    state = warm_start_state(best, problem, StepSchedule(solver_cfg.step_a, solver_cfg.step_b))
    for _ in range(refine):
        raw = best_response_all(state, problem)
        candidate = repair_allocation(raw, problem)
        value = utility(candidate, problem)
        if value > best_utility:
            best, best_utility = candidate, value
        state = update_multipliers(state, raw, problem)

    return make_solution(best, problem, "surrogate")
