"""
Raw and central moments of L_{n,c} and L_{n,c,r} as polynomials in x.

Closed forms and the binomial raw-to-central conversion are expanded in exact
rational arithmetic from the binary64 values of n and c: the alternating sums
cancel badly in floating point once n is large. The recurrence has positive
coefficients and runs in floats.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from hybridop.core.errors import DomainError
from hybridop.schemas.params import EvalConfig, LambdaNorm, OperatorParams, SecondMomentComparison, default_eval_config
from hybridop.services.operator import apply_transformed, operator_mgf
from hybridop.utils.function_suite import centered_power
from hybridop.utils.numerics import central_difference, richardson_extrapolate

logger = logging.getLogger(__name__)

MAX_MOMENT_ORDER = 12
_DISCREPANCY_THRESHOLD = 1e-8


@dataclass(frozen=True)
class MomentPolynomial:
    """Moment of the operator as a polynomial in x at fixed (n, c)."""
    coeffs: Tuple[float, ...]
    order: int
    kind: str  # "raw" or "central"
    params: OperatorParams

    def __post_init__(self):
        if self.degree > self.order:
            raise DomainError("moment polynomial degree exceeds its order", order=self.order, degree=self.degree)

    @property
    def degree(self) -> int:
        nonzero = [j for j, c in enumerate(self.coeffs) if c != 0.0]
        return nonzero[-1] if nonzero else 0

    @property
    def polynomial(self) -> Polynomial:
        return Polynomial(self.coeffs)

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, np.asarray(self.coeffs, dtype=float))

    def derivative(self, m: int = 1) -> Polynomial:
        return self.polynomial.deriv(m)


def _check_order(value: int, name: str) -> None:
    if not 0 <= value <= MAX_MOMENT_ORDER:
        raise DomainError(f"{name} must lie in [0, 12]", **{name: value})


def _exact(params: OperatorParams) -> Tuple[Fraction, Fraction]:
    return Fraction(params.n), Fraction(params.c)


def _raw_moment_fractions(params: OperatorParams, r: int) -> List[Fraction]:
    """
    M_{n,r}(x) = n^{-r} sum_j C(r,j) (1+cx)^j (n/c)_j (-1)^{r-j} prod_{k=1}^{r-j} (n/c - k),
    coefficients of x^0..x^r.
    """
    n, c = _exact(params)
    a = n / c
    coeffs = [Fraction(0)] * (r + 1)
    for j in range(r + 1):
        rising = math.prod((a + i for i in range(j)), start=Fraction(1))
        falling = math.prod((a - k for k in range(1, r - j + 1)), start=Fraction(1))
        term = math.comb(r, j) * rising * falling * (-1) ** (r - j)
        for i in range(j + 1):
            coeffs[i] += term * math.comb(j, i) * c ** i
    scale = n ** -r
    return [co * scale for co in coeffs]


def raw_moment_closed(params: OperatorParams, r: int) -> MomentPolynomial:
    """Raw moment M_{n,r}(x) = L_{n,c}(t^r, x)."""
    _check_order(r, "r")
    coeffs = tuple(float(co) for co in _raw_moment_fractions(params, r))
    return MomentPolynomial(coeffs=coeffs, order=r, kind="raw", params=params)


def central_moment_recurrence(params: OperatorParams, m_max: int) -> List[MomentPolynomial]:
    """
    mu_0 .. mu_{m_max} from

        n mu_{m+1} = x(1+cx)[mu_m' + m mu_{m-1}] + (m+1) mu_m + m x mu_{m-1}

    seeded with mu_0 = 1, mu_1 = 1/n.
    """
    _check_order(m_max, "m_max")
    n, c = params.n, params.c
    quad = Polynomial([0.0, 1.0, c])
    lin = Polynomial([0.0, 1.0])
    mus = [Polynomial([1.0]), Polynomial([1.0 / n])]
    for m in range(1, m_max):
        prev, cur = mus[m - 1], mus[m]
        nxt = (quad * (cur.deriv() + m * prev) + (m + 1) * cur + m * lin * prev) / n
        mus.append(nxt)
    return [
        MomentPolynomial(coeffs=_trimmed(p.coef, m), order=m, kind="central", params=params)
        for m, p in enumerate(mus[:m_max + 1])
    ]


def _trimmed(coef: Sequence[float], order: int) -> Tuple[float, ...]:
    values = [float(v) for v in coef][:order + 1]
    return tuple(values + [0.0] * (order + 1 - len(values)))


def central_from_raw(params: OperatorParams, m: int) -> MomentPolynomial:
    """mu_{n,m}(x) = sum_j C(m,j) (-x)^{m-j} M_{n,j}(x)."""
    _check_order(m, "m")
    coeffs = [Fraction(0)] * (m + 1)
    for j in range(m + 1):
        raw = _raw_moment_fractions(params, j)
        shift = m - j
        sign = (-1) ** shift * math.comb(m, j)
        for i, co in enumerate(raw):
            if i + shift <= m:
                coeffs[i + shift] += sign * co
    return MomentPolynomial(coeffs=tuple(float(co) for co in coeffs), order=m, kind="central", params=params)


def lambda_norm(params: OperatorParams, s: int) -> LambdaNorm:
    """lambda_n(c, s) = (n/c)_s c^s n^{-s} = prod_{i<s} (n + i c)/n."""
    _check_order(s, "s")
    value = math.prod((params.n + i * params.c) / params.n for i in range(s))
    return LambdaNorm(s=s, value=value)


# ============================================
# Transformed operator moments
# ============================================

def transformed_first_central_moment(params: OperatorParams, r: int, x: float) -> float:
    """L_{n,c,r}(t - x, x) = (1 + r(1 + cx))/n."""
    return (1.0 + r * (1.0 + params.c * x)) / params.n


def printed_second_moment(params: OperatorParams, r: int, x: float) -> float:
    """[n x(cx+2) + r(x(cx+4)+3) + r^2 (x+1)^2 + 2]/n^2; exact only for c = 1."""
    n, c = params.n, params.c
    return (n * x * (c * x + 2) + r * (x * (c * x + 4) + 3) + r * r * (x + 1) ** 2 + 2) / n ** 2


def exact_second_moment(params: OperatorParams, r: int, x: float) -> float:
    """[n x(cx+2) + r(cx+1)(cx+3) + r^2 (cx+1)^2 + 2]/n^2."""
    n, cx = params.n, params.c * x
    return (n * x * (cx + 2) + r * (cx + 1) * (cx + 3) + r * r * (cx + 1) ** 2 + 2) / n ** 2


def transformed_second_central_moment(
    params: OperatorParams,
    r: int,
    x: float,
    cfg: Optional[EvalConfig] = None,
) -> SecondMomentComparison:
    """Numeric L_{n,c,r}((t-x)^2, x) beside the printed and exact closed forms."""
    cfg = cfg or default_eval_config()
    numeric = apply_transformed(centered_power(x, 2), r, x, params, cfg).value
    printed = printed_second_moment(params, r, x)
    exact = exact_second_moment(params, r, x)
    discrepancy = abs(numeric - printed) / abs(numeric) if numeric != 0 else abs(printed)
    if discrepancy > _DISCREPANCY_THRESHOLD:
        logger.warning(
            "⚠️ Printed second moment of the transformed operator is off by %.3g (n=%s, c=%s, r=%d, x=%s)",
            discrepancy, params.n, params.c, r, x,
        )
    return SecondMomentComparison(r=r, x=x, numeric=numeric, printed=printed, exact=exact, discrepancy=discrepancy)


# ============================================
# MGF oracle
# ============================================

def raw_moment_from_mgf(params: OperatorParams, r: int, x: float, step: float = 0.02) -> float:
    """r-th theta-derivative of operator_mgf at 0 by central differences with one Richardson level."""
    if not 0 <= r <= 6:
        raise DomainError("MGF differentiation supports r in [0, 6]", r=r)
    if r == 0:
        return 1.0

    def mgf(theta: float) -> float:
        return operator_mgf(theta, x, params)

    coarse = central_difference(mgf, 0.0, r, step)
    fine = central_difference(mgf, 0.0, r, 0.5 * step)
    return richardson_extrapolate([coarse, fine], p=2, r=2.0)
