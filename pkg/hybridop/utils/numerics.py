"""Small numerical helpers: Richardson extrapolation and finite-difference stencils."""

import math
from typing import Callable, Sequence

import numpy as np

from hybridop.core.errors import DomainError


def richardson_extrapolate(values: Sequence[float], p: int = 1, r: float = 2.0) -> float:
    """
    Repeated Richardson extrapolation.

    Args:
        values: estimates at steps h, h/r, h/r^2, ... (or sweep values at n, r n, ...)
        p: leading error order (error ~ h^p)
        r: step ratio between successive estimates

    Returns:
        Extrapolated estimate
    """
    tableau = [float(v) for v in values]
    if not tableau:
        raise DomainError("nothing to extrapolate")
    k = p
    while len(tableau) > 1:
        factor = r ** k
        tableau = [(factor * fine - coarse) / (factor - 1.0) for coarse, fine in zip(tableau[:-1], tableau[1:])]
        k += 1
    return tableau[0]


def central_difference(fn: Callable[[float], float], x: float, order: int, h: float) -> float:
    """Second-order central difference sum_i (-1)^i C(order, i) fn(x + (order/2 - i) h) / h^order."""
    if order < 1:
        raise DomainError("difference order must be positive", order=order)
    terms = [(-1) ** i * math.comb(order, i) * fn(x + (0.5 * order - i) * h) for i in range(order + 1)]
    return math.fsum(terms) / h ** order


def five_point_derivative(fn: Callable[[float], float], x: float, order: int, h: float) -> float:
    """Fourth-order five-point stencils for first and second derivatives."""
    f_m2, f_m1, f_p1, f_p2 = fn(x - 2 * h), fn(x - h), fn(x + h), fn(x + 2 * h)
    if order == 1:
        return (-f_p2 + 8.0 * f_p1 - 8.0 * f_m1 + f_m2) / (12.0 * h)
    if order == 2:
        f_0 = fn(x)
        return (-f_p2 + 16.0 * f_p1 - 30.0 * f_0 + 16.0 * f_m1 - f_m2) / (12.0 * h * h)
    raise DomainError("five-point stencils support orders 1 and 2", order=order)


def loglog_slope(ns: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of log(values) against log(ns)."""
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(values, float)), 1)[0])


def local_orders(ns: Sequence[float], values: Sequence[float]) -> np.ndarray:
    """Slopes log(v_{j+1}/v_j) / log(n_{j+1}/n_j) between consecutive sweep points."""
    ns = np.asarray(ns, float)
    values = np.asarray(values, float)
    return np.diff(np.log(values)) / np.diff(np.log(ns))
