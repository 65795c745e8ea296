"""
Some small numeric utils we need
"""
import dataclasses
import itertools
import math
from typing import Callable

import numpy as np

INV_PHI = (math.sqrt(5) - 1) / 2


@dataclasses.dataclass(frozen=True)
class GoldenResult:
    """
    Best point seen by a golden-section search
    """
    x: float
    value: float
    iterations: int
    converged: bool


def golden_section(func: Callable[[float], float],
                   lower: float,
                   upper: float,
                   tol: float = 1e-8,
                   max_iter: int = 200,
                   maximize: bool = False) -> GoldenResult:
    """
    Golden-section search on [lower, upper].

    The endpoints are evaluated too and the best point ever evaluated is
    returned, so the result is never worse than either endpoint.
    """
    sign = -1.0 if maximize else 1.0

    def objective(x):
        value = sign * func(x)
        return math.inf if math.isnan(value) else value

    best_x, best_f = lower, objective(lower)
    f_upper = objective(upper)
    if f_upper < best_f:
        best_x, best_f = upper, f_upper

    a, b = lower, upper
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = objective(c), objective(d)

    iteration = 0
    while iteration < max_iter and abs(b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = objective(d)
        iteration += 1

    for x, value in ((c, fc), (d, fd)):
        if value < best_f:
            best_x, best_f = x, value

    return GoldenResult(
        x=best_x,
        value=sign * best_f,
        iterations=iteration,
        converged=abs(b - a) <= tol)


def central_difference(func: Callable[[float], float], x: float, step: float = 1e-5) -> float:
    """Symmetric difference quotient
    """
    return (func(x + step) - func(x - step)) / (2 * step)


def richardson_derivative(func: Callable[[float], float], x: float, step: float = 1e-3) -> float:
    """
    Richardson extrapolation of two central differences (steps h and h/2),
    used as an independent cross-check
    """
    coarse = central_difference(func, x, step)
    fine = central_difference(func, x, step / 2)
    return (4 * fine - coarse) / 3


def log_grid(lower: float, upper: float, points: int) -> np.ndarray:
    if points == 1:
        return np.array([lower])
    return np.geomspace(lower, upper, points)


def warped_grid(cap: float, points: int, knee: float) -> np.ndarray:
    """
    Grid on [0, cap]: two thirds of the points linear on [0, knee],
    the rest log-spaced on (knee, cap]
    """
    knee = min(knee, cap)
    linear_points = max(2, math.ceil(2 * points / 3))
    linear = np.linspace(0.0, knee, linear_points)
    rest = points - linear_points
    if rest <= 0 or cap <= knee:
        return linear
    tail = np.geomspace(knee, cap, rest + 1)[1:]
    return np.concatenate([linear, tail])


def simplex_counts(dim: int, steps: int) -> np.ndarray:
    """
    All vectors of `dim` nonnegative integers summing to `steps`,
    in lexicographic order (stars and bars)
    """
    output = []
    for bars in itertools.combinations(range(steps + dim - 1), dim - 1):
        previous = -1
        counts = []
        for bar in bars:
            counts.append(bar - previous - 1)
            previous = bar
        counts.append(steps + dim - 2 - previous)
        output.append(counts)
    return np.array(output, dtype=np.int64).reshape(-1, dim)


def simplex_grid(dim: int, steps: int) -> np.ndarray:
    """Probability vectors with entries in multiples of 1/steps
    """
    return simplex_counts(dim, steps) / steps
