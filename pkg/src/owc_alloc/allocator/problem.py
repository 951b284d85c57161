"""
Resource allocation problem: proportional-fair utility over per-link rates
with per-AP capacities and per-user demand bounds
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from ..utils.errors import InfeasibleProblemError, InvalidAllocationError, InvalidParameterError

logger = logging.getLogger(__name__)

FEASIBILITY_TOL_REL = 1e-6


@dataclass(frozen=True)
class AllocationProblem:
    """Rates r[k, l], demand bounds e_min/e_max, capacities rho and weights xi"""

    rates: np.ndarray
    e_min: np.ndarray
    e_max: np.ndarray
    capacity: np.ndarray
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        rates = np.atleast_2d(np.asarray(self.rates, dtype=float))
        K, L = rates.shape
        e_min = np.asarray(self.e_min, dtype=float).reshape(-1)
        e_max = np.asarray(self.e_max, dtype=float).reshape(-1)
        capacity = np.asarray(self.capacity, dtype=float).reshape(-1)
        weights = np.ones(K) if self.weights is None else np.asarray(self.weights, dtype=float).reshape(-1)

        if e_min.shape != (K,) or e_max.shape != (K,) or weights.shape != (K,):
            raise InvalidParameterError(f"user vectors must have length K={K}")
        if capacity.shape != (L,):
            raise InvalidParameterError(f"capacity must have length L={L}")
        if not np.all(np.isfinite(rates)) or np.any(rates < 0):
            raise InvalidParameterError("rates must be finite and nonnegative")
        if np.any(e_min < 0) or np.any(e_min > e_max):
            raise InvalidParameterError("demand bounds must satisfy 0 <= e_min <= e_max")
        if np.any(capacity <= 0):
            raise InvalidParameterError("AP capacities must be positive")
        if np.any(weights <= 0):
            raise InvalidParameterError("user weights must be positive")
        if e_min.sum() > capacity.sum() * (1 + 1e-12):
            raise InfeasibleProblemError(
                f"total minimum demand {e_min.sum():.6g} exceeds total capacity {capacity.sum():.6g}"
            )

        for name, value in (("rates", rates), ("e_min", e_min), ("e_max", e_max),
                            ("capacity", capacity), ("weights", weights)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def K(self) -> int:
        return self.rates.shape[0]

    @property
    def L(self) -> int:
        return self.rates.shape[1]

    @property
    def tolerance(self) -> float:
        """Absolute feasibility tolerance 1e-6 * max(rho)"""
        return FEASIBILITY_TOL_REL * float(self.capacity.max())


class StepSchedule:
    """Diminishing step size a / (b + i)"""

    def __init__(self, a: float = 0.1, b: float = 10.0):
        if a <= 0 or b <= 0:
            raise InvalidParameterError("step schedule constants must be positive")
        self.a = a
        self.b = b

    def __call__(self, iteration: int) -> float:
        return self.a / (self.b + iteration)

    def __repr__(self) -> str:
        return f"StepSchedule(a={self.a}, b={self.b})"


@dataclass(frozen=True)
class MultiplierState:
    """Lagrange multipliers: lam per AP, eta1 (upper bound) and eta2 (lower bound) per user"""

    lam: np.ndarray
    eta1: np.ndarray
    eta2: np.ndarray
    iteration: int = 0
    schedule: Callable[[int], float] = field(default_factory=StepSchedule)

    def __post_init__(self):
        for name in ("lam", "eta1", "eta2"):
            value = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            if np.any(value < 0):
                raise InvalidParameterError(f"multipliers {name} must be nonnegative")
            object.__setattr__(self, name, value)

    @classmethod
    def initial(
        cls,
        problem: AllocationProblem,
        value: float = 0.1,
        schedule: Optional[Callable[[int], float]] = None,
    ) -> "MultiplierState":
        return cls(
            lam=np.full(problem.L, value),
            eta1=np.full(problem.K, value),
            eta2=np.full(problem.K, value),
            schedule=schedule or StepSchedule(),
        )


@dataclass(frozen=True)
class AllocationSolution:
    """
    Allocation with its utility and feasibility

    trace rows are (iteration, best feasible utility so far, max violation of the iterate).
    """

    e: np.ndarray
    utility: float
    feasible: bool
    method: str
    trace: np.ndarray = field(default_factory=lambda: np.empty((0, 3)))
    state: Optional[MultiplierState] = None
    converged: bool = True
    diagnostic: str = ""

    def with_method(self, method: str) -> "AllocationSolution":
        return replace(self, method=method)


def _check_shape(e: np.ndarray, problem: AllocationProblem) -> np.ndarray:
    e = np.asarray(e, dtype=float)
    if e.shape != (problem.K, problem.L):
        raise InvalidAllocationError(f"allocation has shape {e.shape}, expected {(problem.K, problem.L)}")
    return e


def utility(e: np.ndarray, problem: AllocationProblem) -> float:
    """Sum over users and APs of ln(1 + xi_k e[k, l] r[k, l])"""
    e = _check_shape(e, problem)
    if np.any(e < 0):
        raise InvalidAllocationError("allocation has negative entries")
    return float(np.log1p(problem.weights[:, None] * e * problem.rates).sum())


def sum_rate(e: np.ndarray, problem: AllocationProblem) -> float:
    """Sum of rate-weighted resources e[k, l] r[k, l]"""
    e = _check_shape(e, problem)
    return float((e * problem.rates).sum())


def constraint_violation(e: np.ndarray, problem: AllocationProblem) -> float:
    """Largest violation over capacities, demand bounds and nonnegativity"""
    e = _check_shape(e, problem)
    user_totals = e.sum(axis=1)
    ap_totals = e.sum(axis=0)
    return float(max(
        np.max(ap_totals - problem.capacity, initial=0.0),
        np.max(user_totals - problem.e_max, initial=0.0),
        np.max(problem.e_min - user_totals, initial=0.0),
        np.max(-e, initial=0.0),
    ))


def is_feasible(e: np.ndarray, problem: AllocationProblem, tol_rel: float = FEASIBILITY_TOL_REL) -> bool:
    return constraint_violation(e, problem) <= tol_rel * float(problem.capacity.max())


def repair_allocation(e: np.ndarray, problem: AllocationProblem) -> np.ndarray:
    """
    Project an allocation onto the feasible set

    Order: clip negatives, scale overloaded AP columns down to rho, scale
    user rows down to e_max, then fill e_min deficits from AP slack (highest
    rate first) and finally from other users' surplus above their e_min.
    Feasible inputs come back unchanged.
    """
    e = np.clip(_check_shape(e, problem), 0.0, None).copy()

    ap_totals = e.sum(axis=0)
    overloaded = ap_totals > problem.capacity
    if overloaded.any():
        e[:, overloaded] *= problem.capacity[overloaded] / ap_totals[overloaded]

    user_totals = e.sum(axis=1)
    excessive = user_totals > problem.e_max
    if excessive.any():
        e[excessive] *= (problem.e_max[excessive] / user_totals[excessive])[:, None]

    deficits = problem.e_min - e.sum(axis=1)
    for k in np.flatnonzero(deficits > 0):
        need = problem.e_min[k] - e[k].sum()
        order = np.argsort(-problem.rates[k], kind="stable")

        for l in order:
            if need <= 0:
                break
            slack = problem.capacity[l] - e[:, l].sum()
            if slack > 0:
                take = min(need, slack)
                e[k, l] += take
                need -= take

        for l in order:
            if need <= 0:
                break
            for j in range(problem.K):
                if need <= 0:
                    break
                if j == k:
                    continue
                surplus = e[j].sum() - problem.e_min[j]
                take = min(need, e[j, l], surplus)
                if take > 0:
                    e[j, l] -= take
                    e[k, l] += take
                    need -= take

        if need > problem.tolerance:
            raise InfeasibleProblemError(f"cannot satisfy the minimum demand of user {k}")
    return e


def make_solution(
    e: np.ndarray,
    problem: AllocationProblem,
    method: str,
    trace: Optional[np.ndarray] = None,
    state: Optional[MultiplierState] = None,
    converged: bool = True,
    diagnostic: str = "",
) -> AllocationSolution:
    e = np.asarray(e, dtype=float)
    return AllocationSolution(
        e=e,
        utility=utility(e, problem),
        feasible=is_feasible(e, problem),
        method=method,
        trace=np.empty((0, 3)) if trace is None else np.asarray(trace, dtype=float),
        state=state,
        converged=converged,
        diagnostic=diagnostic,
    )
