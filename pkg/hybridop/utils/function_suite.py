"""
Bundled test functions.

Every entry declares its growth and supplies exact derivatives, so operator
evaluations and derivative transfers can trust the metadata.
"""

import math
from typing import Callable, Dict, Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from hybridop.core.errors import DomainError
from hybridop.schemas.functions import FunctionSpec

_MAX_LISTED_DERIVATIVES = 8


def polynomial(coeffs: Sequence[float], label: Optional[str] = None) -> FunctionSpec:
    """Polynomial sum_j coeffs[j] t^j with all derivatives up to order 8."""
    coeffs = [float(c) for c in coeffs]
    if not coeffs:
        raise DomainError("polynomial needs at least one coefficient")
    poly = Polynomial(coeffs)
    derivs = []
    current = poly
    for _ in range(_MAX_LISTED_DERIVATIVES):
        current = current.deriv() if current.degree() > 0 else Polynomial([0.0])
        derivs.append(_poly_evaluator(current))
    # |p(t)| <= sum |a_j| (1 + t)^deg, and the same for each derivative
    bound = max(1.0, sum(abs(c) * math.factorial(j) for j, c in enumerate(coeffs)))
    return FunctionSpec(
        evaluator=_poly_evaluator(poly),
        derivatives=tuple(derivs),
        growth_rate=0.0,
        growth_constant=bound,
        growth_degree=len(coeffs) - 1,
        label=label or f"poly{tuple(coeffs)}",
        coefficients=tuple(coeffs),
    )


def _poly_evaluator(poly: Polynomial) -> Callable[[np.ndarray], np.ndarray]:
    coef = poly.coef.copy()
    return lambda t: np.polynomial.polynomial.polyval(t, coef)


def monomial(j: int) -> FunctionSpec:
    return polynomial([0.0] * j + [1.0], label=f"t{j}")


def centered_power(x: float, m: int) -> FunctionSpec:
    """(t - x)^m."""
    coeffs = [math.comb(m, i) * (-x) ** (m - i) for i in range(m + 1)]
    return polynomial(coeffs, label=f"(t-{x:g})^{m}")


def exponential(theta: float) -> FunctionSpec:
    """e^{theta t}; growth rate max(theta, 0)."""
    derivs = tuple((lambda t, j=j: theta ** j * np.exp(theta * t)) for j in range(1, _MAX_LISTED_DERIVATIVES + 1))
    return FunctionSpec(
        evaluator=lambda t: np.exp(theta * t),
        derivatives=derivs,
        growth_rate=max(theta, 0.0),
        growth_constant=max(1.0, abs(theta) ** _MAX_LISTED_DERIVATIVES),
        label=f"exp({theta:g}t)",
    )


def exp_neg() -> FunctionSpec:
    derivs = tuple((lambda t, j=j: (-1.0) ** j * np.exp(-t)) for j in range(1, _MAX_LISTED_DERIVATIVES + 1))
    return FunctionSpec(evaluator=lambda t: np.exp(-t), derivatives=derivs, label="exp_neg")


def exp_neg_sin() -> FunctionSpec:
    """e^{-t} sin t; j-th derivative 2^{j/2} e^{-t} sin(t + 3 pi j / 4)."""
    derivs = tuple(
        (lambda t, j=j: 2.0 ** (0.5 * j) * np.exp(-t) * np.sin(t + 0.75 * np.pi * j))
        for j in range(1, _MAX_LISTED_DERIVATIVES + 1)
    )
    return FunctionSpec(
        evaluator=lambda t: np.exp(-t) * np.sin(t),
        derivatives=derivs,
        growth_constant=2.0 ** (0.5 * _MAX_LISTED_DERIVATIVES),
        label="exp_neg_sin",
    )


def kink32() -> FunctionSpec:
    """|t - 1|^{3/2} + t; first derivative is Lip 1/2 with a cusp at 1."""
    return FunctionSpec(
        evaluator=lambda t: np.abs(t - 1.0) ** 1.5 + t,
        derivatives=(lambda t: 1.0 + 1.5 * np.sign(t - 1.0) * np.sqrt(np.abs(t - 1.0)),),
        growth_constant=3.0,
        growth_degree=2,
        kinks=(1.0,),
        label="kink32",
    )


def inv1p() -> FunctionSpec:
    """1/(1+t); j-th derivative (-1)^j j!/(1+t)^{j+1}."""
    order = 4
    derivs = tuple(
        (lambda t, j=j: (-1.0) ** j * math.factorial(j) / (1.0 + t) ** (j + 1))
        for j in range(1, order + 1)
    )
    return FunctionSpec(
        evaluator=lambda t: 1.0 / (1.0 + t),
        derivatives=derivs,
        growth_constant=float(math.factorial(order)),
        label="inv1p",
    )


def abs1() -> FunctionSpec:
    """|t - 1|."""
    return FunctionSpec(
        evaluator=lambda t: np.abs(t - 1.0),
        growth_constant=1.0,
        growth_degree=1,
        kinks=(1.0,),
        label="abs1",
    )


FUNCTION_SUITE: Dict[str, Callable[[], FunctionSpec]] = {
    **{f"t{j}": (lambda j=j: monomial(j)) for j in range(7)},
    "exp_neg": exp_neg,
    "exp_neg_sin": exp_neg_sin,
    "kink32": kink32,
    "inv1p": inv1p,
    "abs1": abs1,
}


def resolve_function(name: Optional[str] = None, coeffs: Optional[Sequence[float]] = None) -> FunctionSpec:
    """Named suite entry, or an inline polynomial when coefficients are given."""
    if coeffs:
        return polynomial(coeffs, label="inline")
    if name is None:
        raise DomainError("no function given")
    try:
        return FUNCTION_SUITE[name]()
    except KeyError:
        raise DomainError("unknown function", name=name, available=sorted(FUNCTION_SUITE)) from None


