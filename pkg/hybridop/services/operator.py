"""
Evaluation of the hybrid operator

    L_{n,c} f(x) = sum_k p_{n,k}(x) ∫ theta_{n,k}(t) f(t) dt,

its transformed form L_{n,c,r}, derivatives through the transfer identity
d^r/dx^r L_{n,c} f = lambda_n(c, r) L_{n,c,r} f^(r), the closed-form MGF and
tail masses away from x.
"""

import logging
import math
from typing import Optional

from hybridop.core.errors import DomainError, GrowthError, HybridOpError, PoleError
from hybridop.schemas.functions import FunctionSpec
from hybridop.schemas.params import EvalConfig, OperatorParams, OperatorValue, default_eval_config
from hybridop.services.basis import baskakov_weight, window_for
from hybridop.services.quadrature import cached_erlang_integrals, erlang_integrals, polynomial_erlang_integrals
from hybridop.utils.function_suite import exponential

logger = logging.getLogger(__name__)

MAX_TRANSFORM_ORDER = 6


def _weighted_sum(
    f: FunctionSpec,
    r: int,
    x: float,
    basis: OperatorParams,
    kernel_n: float,
    cfg: EvalConfig,
) -> OperatorValue:
    """sum_k p_{basis,k}(x) ∫ theta_{kernel_n,k+r} f."""
    if x < 0:
        raise DomainError("x must be nonnegative", x=x)
    if f.growth_rate >= kernel_n:
        raise GrowthError("function growth rate must be below n", n=kernel_n, growth_rate=f.growth_rate, label=f.label)
    try:
        window = window_for(basis, x, cfg.truncation_tolerance, cfg.truncation_cap,
                            growth_rate=f.growth_rate, kernel_n=kernel_n, growth_degree=f.growth_degree)
        ks = window.ks
        weights = baskakov_weight(basis, ks, x)
        if f.coefficients is not None:
            values, errors = polynomial_erlang_integrals(f.coefficients, kernel_n, ks + r)
        else:
            values, errors = cached_erlang_integrals(f, kernel_n, ks + r, cfg.quadrature)
    except HybridOpError as exc:
        raise exc.with_context(x=x, n=kernel_n, c=basis.c)
    return OperatorValue(
        value=math.fsum(weights * values),
        truncation_mass_dropped=max(0.0, 1.0 - window.captured_mass),
        quadrature_error=math.fsum(weights * errors),
    )


def apply(f: FunctionSpec, x: float, params: OperatorParams, cfg: Optional[EvalConfig] = None) -> OperatorValue:
    """L_{n,c} f(x)."""
    return apply_transformed(f, 0, x, params, cfg)


def apply_transformed(
    f_r: FunctionSpec,
    r: int,
    x: float,
    params: OperatorParams,
    cfg: Optional[EvalConfig] = None,
) -> OperatorValue:
    """L_{n,c,r} f_r(x) = sum_k p_{n+rc,k}(x) ∫ theta_{n,k+r}(t) f_r(t) dt."""
    if not 0 <= r <= MAX_TRANSFORM_ORDER:
        raise DomainError("transform order must lie in [0, 6]", r=r)
    cfg = cfg or default_eval_config()
    return _weighted_sum(f_r, r, x, params.shifted(r), params.n, cfg)


def apply_transformed_printed(
    f_r: FunctionSpec,
    r: int,
    x: float,
    params: OperatorParams,
    cfg: Optional[EvalConfig] = None,
) -> OperatorValue:
    """Transformed operator with the basis shift n -> n + r; equals apply_transformed only when c = 1."""
    if not 0 <= r <= MAX_TRANSFORM_ORDER:
        raise DomainError("transform order must lie in [0, 6]", r=r)
    cfg = cfg or default_eval_config()
    basis = params.model_copy(update={"n": params.n + r})
    return _weighted_sum(f_r, r, x, basis, params.n, cfg)


def transfer_factor(params: OperatorParams, r: int) -> float:
    """prod_{i<r} (n + i c) / n."""
    return math.prod((params.n + i * params.c) / params.n for i in range(r))


def derivative_of_operator(
    f: FunctionSpec,
    r: int,
    x: float,
    params: OperatorParams,
    cfg: Optional[EvalConfig] = None,
) -> OperatorValue:
    """d^r/dx^r L_{n,c} f(x) = lambda_n(c, r) L_{n,c,r} f^(r)(x); r = 0 gives apply."""
    f_r = f.derivative_spec(r)
    value = apply_transformed(f_r, r, x, params, cfg)
    return value.scaled(transfer_factor(params, r))


def operator_mgf(theta: float, x: float, params: OperatorParams) -> float:
    """L_{n,c}(e^{theta t}, x) = n (n-theta)^{n/c-1} / (n - theta(1+cx))^{n/c}."""
    if x < 0:
        raise DomainError("x must be nonnegative", x=x)
    n, a = params.n, params.size
    y = 1.0 + params.c * x
    if theta >= n or theta * y >= n:
        raise PoleError("theta at or beyond the MGF pole", theta=theta, x=x, n=n, c=params.c)
    # log n terms cancel: (a-1) log(1 - theta/n) - a log(1 - theta y/n)
    return math.exp((a - 1.0) * math.log1p(-theta / n) - a * math.log1p(-theta * y / n))


def tail_mass(
    params: OperatorParams,
    x: float,
    delta: float,
    gamma: float = 0.0,
    cfg: Optional[EvalConfig] = None,
) -> float:
    """sum_k p_{n,k}(x) ∫_{|t-x| >= delta} theta_{n,k}(t) e^{gamma t} dt."""
    if x <= 0 or delta <= 0:
        raise DomainError("x and delta must be positive", x=x, delta=delta)
    if gamma < 0 or gamma >= params.n:
        raise GrowthError("gamma must lie in [0, n)", gamma=gamma, n=params.n)
    cfg = cfg or default_eval_config()
    upper = x + delta + 30.0 / math.sqrt(params.n) + 20.0 * (1.0 + gamma) / params.n
    segments = [(x + delta, upper)]
    if x - delta > 0:
        segments.insert(0, (0.0, x - delta))
    g = exponential(gamma)
    try:
        window = window_for(params, x, cfg.truncation_tolerance, cfg.truncation_cap, growth_rate=gamma)
        ks = window.ks
        weights = baskakov_weight(params, ks, x)
        inner, _ = erlang_integrals(g, params.n, ks, cfg.quadrature, t_segments=segments)
        beyond, _ = erlang_integrals(g, params.n, ks, cfg.quadrature, t_segments=[(upper, math.inf)])
    except HybridOpError as exc:
        raise exc.with_context(x=x, n=params.n, delta=delta)
    remainder = math.fsum(weights * beyond)
    if remainder > 1e-16:
        logger.debug("tail beyond T=%.6g carries %.3g (n=%s, x=%s)", upper, remainder, params.n, x)
    return max(0.0, math.fsum(weights * inner) + remainder)
