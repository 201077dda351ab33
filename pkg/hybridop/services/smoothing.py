"""
Finite differences, moduli of smoothness and Steklov means.

The Steklov mean of order s and step h is

    f_{h,s}(t) = E[ f(t) + (-1)^{s-1} Δ^s_{U} f(t) ] = sum_{i=1}^{s} (-1)^{i+1} C(s,i) E[f(t + i U)],

with U = t_1 + ... + t_s, t_j uniform on [-h/2, h/2]. Each term is an s-fold
moving average A_i^s f with window i h, so its r-th derivative is
A_i^{s-r} applied to the r-th central difference with step i h, divided by (i h)^r.
Derivatives therefore reuse the same tensor quadrature on s - r axes.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from hybridop.core.config import get_settings
from hybridop.core.errors import DomainError, HTooLargeError
from hybridop.schemas.functions import FunctionSpec
from hybridop.schemas.params import IntervalPair
from hybridop.services.quadrature import gauss_legendre_rule

logger = logging.getLogger(__name__)

MAX_STEKLOV_ORDER = 3
MIN_GRID_POINTS = 64


def forward_difference(f: FunctionSpec, s: int, h: float, x):
    """Δ^s_h f(x) = sum_i (-1)^{s-i} C(s,i) f(x + i h); x may be an array."""
    if s < 1:
        raise DomainError("difference order must be positive", s=s)
    x_arr = np.asarray(x, dtype=float)
    nodes = x_arr[..., None] + h * np.arange(s + 1)
    f.check_nodes(nodes)
    coeffs = np.array([(-1) ** (s - i) * math.comb(s, i) for i in range(s + 1)], dtype=float)
    result = (f(nodes) * coeffs).sum(axis=-1)
    return float(result) if np.ndim(result) == 0 else result


def _kink_aligned_points(f: FunctionSpec, s: int, delta: float, lo: float, hi: float) -> np.ndarray:
    """Start points placing a kink at fractional positions of the difference stencil."""
    if not f.kinks:
        return np.zeros(0)
    fractions = np.linspace(0.0, s, 4 * s + 1)
    points = np.concatenate([kink - fractions * delta for kink in f.kinks])
    return points[(points >= lo) & (points <= hi)]


def modulus_of_smoothness(
    f: FunctionSpec,
    s: int,
    h: float,
    interval: Tuple[float, float],
    grid_points: Optional[int] = None,
    levels: Optional[int] = None,
) -> float:
    """
    omega_s(f, h, [a, b]) on a discrete grid: sup over delta = h j/levels and grid x
    with [x, x + s delta] in [a, b] of |Δ^s_delta f(x)|. A lower bound of the true modulus.
    """
    settings = get_settings()
    grid_points = grid_points or settings.modulus_grid_points
    levels = levels or settings.modulus_levels
    if grid_points < MIN_GRID_POINTS:
        raise DomainError("modulus grid needs at least 64 points", grid_points=grid_points)
    if h <= 0:
        raise DomainError("h must be positive", h=h)
    a, b = interval
    best = 0.0
    for j in range(1, levels + 1):
        delta = h * j / levels
        hi = b - s * delta
        if hi < a:
            break
        xs = np.concatenate([np.linspace(a, hi, grid_points), _kink_aligned_points(f, s, delta, a, hi)])
        diffs = np.abs(forward_difference(f, s, delta, xs))
        best = max(best, float(np.max(diffs)))
    return best


def sup_norm(f: FunctionSpec, interval: Tuple[float, float], grid_points: Optional[int] = None) -> float:
    """Grid maximum of |f| on [a, b], kinks included."""
    grid_points = grid_points or get_settings().sup_grid_points
    a, b = interval
    xs = np.concatenate([np.linspace(a, b, grid_points), [k for k in f.kinks if a <= k <= b]])
    return float(np.max(np.abs(f(xs))))


@lru_cache(maxsize=32)
def _tensor_rule(dims: int, points: int) -> Tuple[np.ndarray, np.ndarray]:
    """Sum of `dims` uniform[-1/2, 1/2] variables at tensor Gauss nodes, with probability weights."""
    if dims == 0:
        return np.zeros(1), np.ones(1)
    nodes, weights = gauss_legendre_rule(points)
    offsets = 0.5 * nodes
    probs = 0.5 * weights
    total = np.zeros(1)
    mass = np.ones(1)
    for _ in range(dims):
        total = (total[:, None] + offsets[None, :]).ravel()
        mass = (mass[:, None] * probs[None, :]).ravel()
    return total, mass


@dataclass(frozen=True)
class SteklovMean:
    """Steklov mean f_{h,s} on the inner interval with derivatives up to order s."""
    source: FunctionSpec
    h: float
    s: int
    intervals: IntervalPair
    points_per_axis: int = 16

    def _check(self, t: np.ndarray) -> None:
        if t.size and (t.min() < self.intervals.a1 - 1e-12 or t.max() > self.intervals.b1 + 1e-12):
            raise DomainError("Steklov mean evaluated outside the inner interval",
                              t_min=float(t.min()), t_max=float(t.max()), inner=self.intervals.inner)

    def __call__(self, t):
        return self.derivative(0, t)

    def derivative(self, r: int, t):
        """r-th derivative of the mean (r = 0 gives the mean itself)."""
        if not 0 <= r <= self.s:
            raise DomainError("Steklov derivative order must lie in [0, s]", r=r, s=self.s)
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        self._check(t_arr)
        offsets, probs = _tensor_rule(self.s - r, self.points_per_axis)
        stencil = [((-1) ** m * math.comb(r, m), 0.5 * r - m) for m in range(r + 1)]
        total = np.zeros_like(t_arr)
        for i in range(1, self.s + 1):
            step = i * self.h
            outer = (-1) ** (i + 1) * math.comb(self.s, i) / step ** r
            averaged = np.zeros_like(t_arr)
            for coeff, shift in stencil:
                nodes = t_arr[:, None] + step * offsets[None, :] + shift * step
                averaged += coeff * (self.source(nodes) @ probs)
            total += outer * averaged
        return float(total[0]) if np.ndim(t) == 0 else total


def steklov_mean(
    f: FunctionSpec,
    h: float,
    s: int,
    intervals: IntervalPair,
    quad_points_per_axis: Optional[int] = None,
) -> SteklovMean:
    """Build f_{h,s}; every sample t + i(U + shift) stays within t ± s^2 h / 2."""
    if not 1 <= s <= MAX_STEKLOV_ORDER:
        raise DomainError("Steklov order must lie in [1, 3]", s=s)
    if h <= 0:
        raise DomainError("h must be positive", h=h)
    reach = s * s * h / 2.0
    slack = 1e-12 * max(1.0, abs(intervals.a), abs(intervals.b))
    if intervals.a1 - reach < intervals.a - slack or intervals.b1 + reach > intervals.b + slack:
        raise HTooLargeError("Steklov samples escape the outer interval", h=h, s=s, reach=reach,
                             outer=intervals.outer, inner=intervals.inner)
    points = quad_points_per_axis or get_settings().steklov_points_per_axis
    logger.debug("Steklov mean s=%d h=%.6g on %s (%d nodes per axis)", s, h, intervals.inner, points)
    return SteklovMean(source=f, h=h, s=s, intervals=intervals, points_per_axis=points)
