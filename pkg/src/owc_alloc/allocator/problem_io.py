"""
Problem files (TOML) and solution/trace CSV output
"""

import csv
import logging
from pathlib import Path
from typing import Union

import numpy as np
import tomlkit
from tomlkit.exceptions import ParseError as TomlParseError

from ..utils.errors import ParseError
from .problem import AllocationProblem, AllocationSolution

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

TRACE_HEADER = ["iter", "utility", "max_violation"]
ALLOCATION_HEADER = ["user", "ap", "e", "rate"]


def read_problem(path: PathLike) -> AllocationProblem:
    """
    Read a problem file

    Keys: K, L, rates (K rows of L values), e_min, e_max, capacity and
    optionally weights.
    """
    try:
        document = tomlkit.parse(Path(path).read_text(encoding="utf-8")).unwrap()
    except OSError as e:
        raise ParseError(f"cannot read problem file: {e}", path=str(path)) from e
    except TomlParseError as e:
        raise ParseError(str(e), path=str(path), line=getattr(e, "line", None)) from e

    missing = [key for key in ("K", "L", "rates", "e_min", "e_max", "capacity") if key not in document]
    if missing:
        raise ParseError(f"missing keys: {', '.join(missing)}", path=str(path))

    K, L = int(document["K"]), int(document["L"])
    try:
        rates = np.array(document["rates"], dtype=float)
    except (TypeError, ValueError) as e:
        raise ParseError(f"rates is not a numeric matrix: {e}", path=str(path)) from e
    if rates.shape != (K, L):
        raise ParseError(f"rates has shape {rates.shape}, expected {(K, L)}", path=str(path))

    try:
        return AllocationProblem(
            rates=rates,
            e_min=document["e_min"],
            e_max=document["e_max"],
            capacity=document["capacity"],
            weights=document.get("weights"),
        )
    except (TypeError, ValueError) as e:
        raise ParseError(str(e), path=str(path)) from e


def problem_to_toml(problem: AllocationProblem) -> str:
    document = tomlkit.document()
    document.add("K", problem.K)
    document.add("L", problem.L)
    document.add("rates", [[float(v) for v in row] for row in problem.rates])
    document.add("e_min", [float(v) for v in problem.e_min])
    document.add("e_max", [float(v) for v in problem.e_max])
    document.add("capacity", [float(v) for v in problem.capacity])
    document.add("weights", [float(v) for v in problem.weights])
    return tomlkit.dumps(document)


def write_problem(problem: AllocationProblem, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(problem_to_toml(problem), encoding="utf-8")
    return path


def write_trace_csv(solution: AllocationSolution, path: PathLike) -> Path:
    """
    Convergence trace with columns iter, utility, max_violation

    utility is the best repaired utility found up to that iteration; it only
    moves on repair iterations. max_violation belongs to the raw iterate.
    """
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for iteration, value, violation in solution.trace:
            writer.writerow([int(iteration), repr(float(value)), repr(float(violation))])
    logger.info(f"Trace written to {path}")
    return path


def write_allocation_csv(solution: AllocationSolution, problem: AllocationProblem, path: PathLike) -> Path:
    """Allocation matrix in long form with columns user, ap, e, rate"""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(ALLOCATION_HEADER)
        for k in range(problem.K):
            for l in range(problem.L):
                writer.writerow([k, l, repr(float(solution.e[k, l])), repr(float(problem.rates[k, l]))])
    logger.info(f"Allocation written to {path}")
    return path
