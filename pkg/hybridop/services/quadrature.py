"""
Integration against the Erlang densities theta_{n,k}.

Work happens in u = n t, where the weight is u^k e^{-u}/k!. For a batch of kernel
indices the integrator:
1. builds a window per k around the (growth-tilted) Gamma(k+1) bulk and covers the
   union with composite Gauss-Legendre panels whose width follows the local spread
   sqrt(u), split at the integrand's declared kinks
2. refines panels adaptively: each panel compares the rule on itself with the rule
   on its two halves; panels carrying more than their share of the error are bisected
3. bounds the mass outside the window with a Chernoff bound on Gamma(k+1)

Whole-line integrals are also memoized per aligned block of 64 kernel indices, so
sweeps over many x at one n integrate each kernel once.
"""

import logging
import math
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln, roots_legendre

from hybridop.core.errors import DomainError, GrowthError, NonConvergentError
from hybridop.schemas.functions import FunctionSpec
from hybridop.schemas.params import QuadratureConfig
from hybridop.services.basis import log_erlang_weight

logger = logging.getLogger(__name__)

_ROUNDOFF_FACTOR = 64.0 * np.finfo(float).eps
_MAX_POLY_DEGREE = 30
ERLANG_BLOCK = 64


@lru_cache(maxsize=None)
def gauss_legendre_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]; cached and read-only."""
    nodes, weights = roots_legendre(order)
    nodes = np.ascontiguousarray(nodes, dtype=float)
    weights = np.ascontiguousarray(weights, dtype=float)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


# ============================================
# Closed forms
# ============================================

def polynomial_erlang_integral(coeffs: Sequence[float], n: float, k: int) -> float:
    """∫ theta_{n,k}(t) sum_j a_j t^j dt = sum_j a_j (k+1)_j / n^j."""
    if n <= 0:
        raise DomainError("n must be positive", n=n)
    coeffs = list(coeffs)
    if len(coeffs) - 1 > _MAX_POLY_DEGREE:
        raise DomainError("polynomial degree must not exceed 30", degree=len(coeffs) - 1)
    terms = []
    moment = 1.0
    for j, a in enumerate(coeffs):
        if j > 0:
            moment *= (k + j) / n
        terms.append(a * moment)
    return math.fsum(terms)


def polynomial_erlang_integrals(coeffs: Sequence[float], n: float, ks: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized closed form over kernel indices, with a roundoff error estimate."""
    if n <= 0:
        raise DomainError("n must be positive", n=n)
    coeffs = list(coeffs)
    if len(coeffs) - 1 > _MAX_POLY_DEGREE:
        raise DomainError("polynomial degree must not exceed 30", degree=len(coeffs) - 1)
    k = np.asarray(ks, dtype=float)
    moment = np.ones_like(k)
    values = np.zeros_like(k)
    scale = np.zeros_like(k)
    for j, a in enumerate(coeffs):
        if j > 0:
            moment = moment * (k + j) / n
        values += a * moment
        scale += abs(a) * moment
    return values, _ROUNDOFF_FACTOR * scale


# ============================================
# Adaptive batch integration
# ============================================

def erlang_integral(g: FunctionSpec, n: float, k: int, cfg: Optional[QuadratureConfig] = None) -> Tuple[float, float]:
    """(value, error_estimate) of ∫_0^inf theta_{n,k}(t) g(t) dt."""
    values, errors = erlang_integrals(g, n, [k], cfg)
    return float(values[0]), float(errors[0])


def erlang_integrals(
    g: FunctionSpec,
    n: float,
    ks: Iterable[int],
    cfg: Optional[QuadratureConfig] = None,
    t_segments: Optional[Sequence[Tuple[float, float]]] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorized Erlang integrals for many kernel indices sharing one node set.

    Args:
        g: integrand; evaluated once per node for the whole batch
        n: kernel rate
        ks: nonnegative kernel indices
        cfg: quadrature settings
        t_segments: optional list of (t_start, t_end) restricting the integration
            region (t_end may be inf); default is [0, inf)

    Returns:
        (values, error_estimates), arrays aligned with ks
    """
    cfg = cfg or QuadratureConfig()
    ks = np.asarray(list(ks) if not isinstance(ks, np.ndarray) else ks, dtype=np.int64)
    if ks.size == 0:
        return np.zeros(0), np.zeros(0)
    if n <= 0:
        raise DomainError("n must be positive", n=n)
    if np.any(ks < 0):
        raise DomainError("kernel indices must be nonnegative", n=n)
    if g.growth_rate >= n:
        raise GrowthError("integrand growth rate must be below n", n=n, growth_rate=g.growth_rate, label=g.label)

    integrator = _ErlangBatch(g, float(n), ks, cfg, t_segments)
    return integrator.run()


@lru_cache(maxsize=8192)
def erlang_block(g: FunctionSpec, n: float, block: int, cfg: QuadratureConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Integrals over [0, inf) for the aligned kernel indices block*64 .. block*64 + 63; read-only."""
    ks = np.arange(block * ERLANG_BLOCK, (block + 1) * ERLANG_BLOCK, dtype=np.int64)
    values, errors = _ErlangBatch(g, n, ks, cfg, None).run()
    values.setflags(write=False)
    errors.setflags(write=False)
    return values, errors


def cached_erlang_integrals(
    g: FunctionSpec,
    n: float,
    ks: Iterable[int],
    cfg: Optional[QuadratureConfig] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    erlang_integrals over [0, inf), memoized per aligned block of kernel indices.

    Windows for neighbouring x at the same n overlap, so a sweep integrates each
    (g, n, k) once. A value depends only on its block, never on the call order.
    """
    cfg = cfg or QuadratureConfig()
    ks = np.asarray(list(ks) if not isinstance(ks, np.ndarray) else ks, dtype=np.int64)
    if ks.size == 0:
        return np.zeros(0), np.zeros(0)
    if n <= 0:
        raise DomainError("n must be positive", n=n)
    if np.any(ks < 0):
        raise DomainError("kernel indices must be nonnegative", n=n)
    if g.growth_rate >= n:
        raise GrowthError("integrand growth rate must be below n", n=n, growth_rate=g.growth_rate, label=g.label)

    blocks = ks // ERLANG_BLOCK
    values = np.empty(ks.size)
    errors = np.empty(ks.size)
    for block in np.unique(blocks):
        selected = blocks == block
        offsets = ks[selected] - block * ERLANG_BLOCK
        block_values, block_errors = erlang_block(g, float(n), int(block), cfg)
        values[selected] = block_values[offsets]
        errors[selected] = block_errors[offsets]
    return values, errors


class _ErlangBatch:
    """Adaptive composite Gauss-Legendre over a shared u-window for a batch of k."""

    def __init__(self, g: FunctionSpec, n: float, ks: np.ndarray, cfg: QuadratureConfig,
                 t_segments: Optional[Sequence[Tuple[float, float]]]):
        self.g = g
        self.n = n
        self.ks = ks
        self.cfg = cfg
        self.beta = 1.0 - g.growth_rate / n
        self.alpha = ks.astype(float) + 1.0
        self.nodes, self.weights = gauss_legendre_rule(cfg.base_order)
        segments = t_segments if t_segments is not None else [(0.0, math.inf)]
        self.u_segments = [(max(0.0, lo) * n, hi * n) for lo, hi in segments if hi > lo]

    # ---------- window and panels ----------

    def _window(self) -> Tuple[float, float]:
        d = float(self.g.growth_degree)
        a_lo = self.alpha
        a_hi = self.alpha + d
        lo = np.maximum(0.0, a_lo - self.cfg.window_sigmas * np.sqrt(a_lo) - self.cfg.window_margin)
        hi = (a_hi + self.cfg.window_sigmas * np.sqrt(a_hi) + self.cfg.window_margin) / self.beta
        return float(lo.min()), float(hi.max())

    def _initial_panels(self, lo: float, hi: float) -> Tuple[np.ndarray, np.ndarray]:
        pieces: List[Tuple[float, float]] = []
        for s_lo, s_hi in self.u_segments:
            a, b = max(s_lo, lo), min(s_hi, hi)
            if b > a:
                pieces.append((a, b))
        breaks = sorted(k * self.n for k in self.g.kinks)
        edges_a: List[float] = []
        edges_b: List[float] = []
        for a, b in pieces:
            cuts = [a] + [u for u in breaks if a < u < b] + [b]
            for left, right in zip(cuts[:-1], cuts[1:]):
                start = left
                while start < right:
                    step = self.cfg.panel_sigmas * max(1.0, math.sqrt(start / self.beta))
                    stop = min(right, start + step)
                    if right - stop < 0.25 * step:
                        stop = right
                    edges_a.append(start)
                    edges_b.append(stop)
                    start = stop
        return np.asarray(edges_a), np.asarray(edges_b)

    # ---------- panel sums ----------

    def _panel_sums(self, a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Gauss-Legendre sums of w_k(u) g(u/n) and w_k(u)|g(u/n)| on each panel, shape (P, K)."""
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        u = mid[:, None] + half[:, None] * self.nodes[None, :]
        qw = half[:, None] * self.weights[None, :]
        t = u / self.n
        g_vals = self.g(t.ravel())
        if not np.all(np.isfinite(g_vals)):
            bad = t.ravel()[~np.isfinite(g_vals)]
            raise DomainError("integrand not finite at quadrature node", n=self.n, t=float(bad[0]), label=self.g.label)
        u_flat = u.ravel()
        wg = (qw.ravel() * g_vals)
        wa = (qw.ravel() * np.abs(g_vals))
        P = a.size
        values = np.empty((P, self.ks.size))
        scales = np.empty((P, self.ks.size))
        step = self.cfg.chunk_size
        for start in range(0, self.ks.size, step):
            kc = self.ks[start:start + step].astype(float)
            weight = np.exp(log_erlang_weight(kc[:, None], u_flat[None, :]))
            values[:, start:start + step] = (weight * wg[None, :]).reshape(kc.size, P, -1).sum(axis=2).T
            scales[:, start:start + step] = (weight * wa[None, :]).reshape(kc.size, P, -1).sum(axis=2).T
        return values, scales

    # ---------- tails ----------

    def _tail_bound(self, lo: float, hi: float) -> np.ndarray:
        """Chernoff bound on the integrand mass outside [lo, hi] but inside the requested region."""
        bound = np.zeros(self.ks.size)
        seg_lo = min(s for s, _ in self.u_segments) if self.u_segments else 0.0
        seg_hi = max(e for _, e in self.u_segments) if self.u_segments else 0.0
        log_a = math.log(self.g.growth_constant)
        d = self.g.growth_degree
        alpha = self.alpha
        log_beta = math.log(self.beta)
        if seg_hi > hi:
            v = self.beta * hi
            # (1 + u/n)^d <= 2^d (1 + (u/n)^d)
            log_main = -alpha * log_beta + _log_upper_chernoff(v, alpha)
            total = np.exp(log_main)
            if d > 0:
                log_poly = (gammaln(alpha + d) - gammaln(alpha) - d * math.log(self.n)
                            - (alpha + d) * log_beta + _log_upper_chernoff(v, alpha + d))
                total = (total + np.exp(log_poly)) * 2.0 ** d
            bound += np.exp(log_a) * total
        if seg_lo < lo and lo > 0:
            v = self.beta * lo
            log_main = -alpha * log_beta + _log_lower_chernoff(v, alpha)
            bound += np.exp(log_a + d * math.log1p(lo / self.n) + log_main)
        return bound

    # ---------- driver ----------

    def run(self) -> Tuple[np.ndarray, np.ndarray]:
        lo, hi = self._window()
        a, b = self._initial_panels(lo, hi)
        K = self.ks.size
        tail = self._tail_bound(lo, hi)
        if a.size == 0:
            return np.zeros(K), tail

        coarse, _ = self._panel_sums(a, b)
        mid = 0.5 * (a + b)
        left, left_abs = self._panel_sums(a, mid)
        right, right_abs = self._panel_sums(mid, b)

        for level in range(self.cfg.max_refinements + 1):
            fine = left + right
            fine_abs = left_abs + right_abs
            err = np.abs(fine - coarse)
            scale = fine_abs.sum(axis=0)
            tol = np.maximum(self.cfg.abs_tolerance, self.cfg.rel_tolerance * scale)
            total_err = err.sum(axis=0)
            if np.all(total_err <= tol):
                values = fine.sum(axis=0)
                errors = total_err + _ROUNDOFF_FACTOR * scale + tail
                return values, errors
            if level == self.cfg.max_refinements:
                worst = int(np.argmax(total_err / tol))
                raise NonConvergentError(
                    "Erlang quadrature did not reach tolerance",
                    n=self.n, k=int(self.ks[worst]), error=float(total_err[worst]), tolerance=float(tol[worst]),
                    label=self.g.label,
                )
            share = (err / tol[None, :]).max(axis=1)
            split = share > 1.0 / a.size
            keep = ~split
            new_a = np.concatenate([a[split], mid[split]])
            new_b = np.concatenate([mid[split], b[split]])
            new_coarse = np.concatenate([left[split], right[split]])
            new_mid = 0.5 * (new_a + new_b)
            new_left, new_left_abs = self._panel_sums(new_a, new_mid)
            new_right, new_right_abs = self._panel_sums(new_mid, new_b)

            a = np.concatenate([a[keep], new_a])
            b = np.concatenate([b[keep], new_b])
            mid = np.concatenate([mid[keep], new_mid])
            coarse = np.concatenate([coarse[keep], new_coarse])
            left = np.concatenate([left[keep], new_left])
            left_abs = np.concatenate([left_abs[keep], new_left_abs])
            right = np.concatenate([right[keep], new_right])
            right_abs = np.concatenate([right_abs[keep], new_right_abs])
            logger.debug("refinement level %d: %d panels split, %d total", level + 1, int(split.sum()), a.size)

        raise AssertionError("unreachable")


def _log_upper_chernoff(v: float, alpha: np.ndarray) -> np.ndarray:
    """log of the Chernoff bound on P(Gamma(alpha, 1) >= v)."""
    alpha = np.asarray(alpha, dtype=float)
    out = np.zeros_like(alpha)
    above = v > alpha
    a = alpha[above]
    out[above] = a - v + a * np.log(v / a)
    return out


def _log_lower_chernoff(v: float, alpha: np.ndarray) -> np.ndarray:
    """log of the Chernoff bound on P(Gamma(alpha, 1) <= v)."""
    alpha = np.asarray(alpha, dtype=float)
    out = np.zeros_like(alpha)
    if v <= 0:
        return np.full_like(alpha, -np.inf)
    below = v < alpha
    a = alpha[below]
    out[below] = a - v + a * np.log(v / a)
    return out
