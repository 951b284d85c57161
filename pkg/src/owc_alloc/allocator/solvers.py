"""
Allocation solvers: exhaustive grid oracle, per-AP KKT best response with
projected subgradient multiplier updates, and the uniform baseline
"""

import logging
import math
from dataclasses import replace
from typing import Optional

import numpy as np

from ..utils.config import SolverConfig
from ..utils.errors import InfeasibleProblemError, InvalidParameterError, ProblemTooLargeError
from .problem import (
    AllocationProblem,
    AllocationSolution,
    MultiplierState,
    StepSchedule,
    constraint_violation,
    make_solution,
    repair_allocation,
    utility,
)

logger = logging.getLogger(__name__)

GRID_EPS = 1e-9


def _best_response(mu: np.ndarray, weighted_rates: np.ndarray, cap: np.ndarray) -> np.ndarray:
    """Maximizer of ln(1 + w e) - mu e over e >= 0, boxed at cap when mu <= 0"""
    with np.errstate(divide="ignore", invalid="ignore"):
        interior = np.maximum(0.0, 1.0 / mu - 1.0 / weighted_rates)
    e = np.where(mu > 0, interior, cap)
    return np.where(weighted_rates > 0, e, 0.0)


def per_ap_best_response(l: int, state: MultiplierState, problem: AllocationProblem) -> np.ndarray:
    """KKT stationary allocations e[:, l] of AP l given the multipliers"""
    if not 0 <= l < problem.L:
        raise InvalidParameterError(f"AP index {l} out of range for L={problem.L}")
    mu = state.lam[l] + state.eta1 - state.eta2
    return _best_response(mu, problem.weights * problem.rates[:, l], problem.e_max)


def best_response_all(state: MultiplierState, problem: AllocationProblem) -> np.ndarray:
    """Best responses of every AP at once, shape (K, L)"""
    mu = state.lam[None, :] + (state.eta1 - state.eta2)[:, None]
    weighted = problem.weights[:, None] * problem.rates
    cap = np.broadcast_to(problem.e_max[:, None], mu.shape)
    return _best_response(mu, weighted, cap)


def update_multipliers(state: MultiplierState, e: np.ndarray, problem: AllocationProblem) -> MultiplierState:
    """One projected subgradient step on lam, eta1 and eta2"""
    e = np.asarray(e, dtype=float)
    step = state.schedule(state.iteration)
    user_totals = e.sum(axis=1)
    ap_totals = e.sum(axis=0)
    return replace(
        state,
        lam=np.maximum(0.0, state.lam - step * (problem.capacity - ap_totals)),
        eta1=np.maximum(0.0, state.eta1 - step * (problem.e_max - user_totals)),
        eta2=np.maximum(0.0, state.eta2 - step * (user_totals - problem.e_min)),
        iteration=state.iteration + 1,
    )


def solve_dual(
    problem: AllocationProblem,
    cfg: Optional[SolverConfig] = None,
    initial_state: Optional[MultiplierState] = None,
) -> AllocationSolution:
    """
    Dual decomposition: per-AP best responses coordinated by multiplier updates

    Stops when the iterate violates no constraint by more than
    tol_rel * max(rho) or after max_iters. Every repair_every iterations
    the iterate is repaired and the best feasible point is kept.

    Trace rows are (i, best repaired utility up to i, violation of iterate i):
    the utility column is the running best, not the utility of iterate i.
    """
    cfg = cfg or SolverConfig()
    if initial_state is None:
        schedule = StepSchedule(cfg.step_a, cfg.step_b)
        initial_state = MultiplierState.initial(problem, cfg.initial_multiplier, schedule)
    state = initial_state
    tol = cfg.tol_rel * float(problem.capacity.max())

    best_e: Optional[np.ndarray] = None
    best_utility = -math.inf
    trace = []
    converged = False
    violation = math.inf

    for i in range(cfg.max_iters):
        e = best_response_all(state, problem)
        violation = constraint_violation(e, problem)
        converged = violation <= tol
        if converged or i % cfg.repair_every == 0 or i == cfg.max_iters - 1:
            candidate = repair_allocation(e, problem)
            value = utility(candidate, problem)
            if value > best_utility:
                best_e, best_utility = candidate, value
        trace.append((i, best_utility, violation))
        if converged:
            break
        state = update_multipliers(state, e, problem)

    diagnostic = ""
    if not converged:
        diagnostic = f"stopped after {cfg.max_iters} iterations with violation {violation:.3g}"
        logger.debug(f"Dual solver {diagnostic}")

    return make_solution(
        best_e, problem, "dual", trace=np.array(trace), state=state,
        converged=converged, diagnostic=diagnostic,
    )


def _user_options(problem: AllocationProblem, k: int, units_max: np.ndarray, grid_step: float):
    """Integer allocation vectors of user k within its demand bounds, with their utilities"""
    grids = np.indices(tuple(units_max + 1)).reshape(problem.L, -1).T
    totals = grids.sum(axis=1)
    lower = math.ceil(problem.e_min[k] / grid_step - GRID_EPS)
    upper = math.floor(problem.e_max[k] / grid_step + GRID_EPS)
    options = grids[(totals >= lower) & (totals <= upper)]
    values = np.log1p(problem.weights[k] * options * grid_step * problem.rates[k]).sum(axis=1)
    return options, values


def solve_exhaustive(
    problem: AllocationProblem,
    grid_step: float = 0.01,
    budget: float = 1e8,
) -> AllocationSolution:
    """
    Exact optimum over the grid {0, step, 2 step, ...}^(K x L)

    Dynamic programming over users with the per-AP usage as state; the
    result equals full enumeration of the grid.
    """
    if not grid_step > 0:
        raise InvalidParameterError(f"grid_step must be positive, got {grid_step}")

    caps = np.floor(problem.capacity / grid_step + GRID_EPS).astype(int)
    units_max = np.floor(np.minimum(problem.e_max[:, None], problem.capacity[None, :]) / grid_step + GRID_EPS)
    units_max = units_max.astype(int)
    # budget counts DP state updates: AP usage states times candidate vectors over all users
    states = float(np.prod((caps + 1).astype(float)))
    updates = states * float(np.prod((units_max + 1).astype(float), axis=1).sum())
    if updates > budget:
        raise ProblemTooLargeError(
            f"search needs {updates:.3g} state updates over {states:.3g} AP usage states, budget is {budget:.3g}"
        )

    shape = tuple(caps + 1)
    value = np.full(shape, -np.inf)
    value[(0,) * problem.L] = 0.0
    choices = []
    user_options = []

    for k in range(problem.K):
        options, option_values = _user_options(problem, k, units_max[k], grid_step)
        if len(options) == 0:
            raise InfeasibleProblemError(f"no grid allocation meets the demand bounds of user {k}")
        nxt = np.full(shape, -np.inf)
        chosen = np.full(shape, -1, dtype=int)
        for index, (option, gain) in enumerate(zip(options, option_values)):
            if np.any(option > caps):
                continue
            src = tuple(slice(0, cap + 1 - c) for cap, c in zip(caps, option))
            dst = tuple(slice(c, cap + 1) for cap, c in zip(caps, option))
            candidate = value[src] + gain
            better = candidate > nxt[dst]
            nxt[dst] = np.where(better, candidate, nxt[dst])
            chosen[dst] = np.where(better, index, chosen[dst])
        value = nxt
        choices.append(chosen)
        user_options.append(options)

    flat_best = int(np.argmax(value))
    if not np.isfinite(value.flat[flat_best]):
        raise InfeasibleProblemError("no grid point satisfies every constraint")

    usage = np.array(np.unravel_index(flat_best, shape))
    e = np.zeros((problem.K, problem.L))
    for k in reversed(range(problem.K)):
        option = user_options[k][choices[k][tuple(usage)]]
        e[k] = option * grid_step
        usage = usage - option

    logger.debug(f"Exhaustive search over {states:.3g} AP usage states ({updates:.3g} updates) finished")
    solution = make_solution(e, problem, "exhaustive")
    return replace(solution, trace=np.array([[0, solution.utility, constraint_violation(e, problem)]]))


def uniform_allocation(problem: AllocationProblem) -> AllocationSolution:
    """Every AP split equally among users, ignoring demand bounds"""
    e = np.tile(problem.capacity / problem.K, (problem.K, 1))
    return make_solution(e, problem, "uniform")


SOLVERS = {
    "dual": lambda problem, cfg: solve_dual(problem, cfg),
    "exhaustive": lambda problem, cfg: solve_exhaustive(problem, cfg.grid_step, cfg.grid_budget),
    "uniform": lambda problem, cfg: uniform_allocation(problem),
}


def solve(problem: AllocationProblem, method: str = "dual", cfg: Optional[SolverConfig] = None) -> AllocationSolution:
    """Dispatch to a solver by name"""
    if method not in SOLVERS:
        raise InvalidParameterError(f"unknown method '{method}', expected one of {sorted(SOLVERS)}")
    return SOLVERS[method](problem, cfg or SolverConfig())
