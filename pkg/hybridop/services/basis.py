"""
Basis functions of the hybrid operator.

- p_{n,k}(x): Baskakov weights, a negative binomial mass in k with size n/c and
  success probability 1/(1+cx)
- theta_{n,k}(t): Erlang densities of shape k+1 and rate n
- truncation windows for the k-series
- the derivative identity d/dx p_{n,k} = n (p_{n+c,k-1} - p_{n+c,k})

Weights go through scipy's negative binomial mass (incomplete-beta derivative),
which stays accurate when n/c and k are both large. Erlang weights use the
saddle-point form with a Stirling correction so that u^k e^{-u}/k! keeps full
relative precision near its mode.
"""

import logging
import math
from typing import Optional

import numpy as np
from scipy.special import gammaln
from scipy.stats import nbinom

from hybridop.core.errors import DomainError, GrowthError, TruncationCapError
from hybridop.schemas.params import OperatorParams, TruncationWindow

logger = logging.getLogger(__name__)

_DIRECT_POCHHAMMER_LIMIT = 30
_STIRLING_DIRECT_LIMIT = 15
_MASS_ROUNDING = 1e-13  # summed pmf rounding accepted when the scan stalls
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# Stirling series coefficients 1/12, 1/360, 1/1260, 1/1680, 1/1188
_S0, _S1, _S2, _S3, _S4 = 1.0 / 12.0, 1.0 / 360.0, 1.0 / 1260.0, 1.0 / 1680.0, 1.0 / 1188.0


# ============================================
# Special functions
# ============================================

def log_pochhammer(a: float, k: int) -> float:
    """
    log of the rising factorial (a)_k = a (a+1) ... (a+k-1).

    Direct log-sum for k < 30, log-Gamma difference beyond.
    """
    if a <= 0:
        raise DomainError("Pochhammer base must be positive", a=a)
    if k < 0:
        raise DomainError("Pochhammer length must be nonnegative", k=k)
    if k == 0:
        return 0.0
    if k < _DIRECT_POCHHAMMER_LIMIT:
        return math.fsum(math.log(a + i) for i in range(k))
    return float(gammaln(a + k) - gammaln(a))


def _stirling_error(k: np.ndarray) -> np.ndarray:
    """log(k!) - [(k + 1/2) log k - k + log sqrt(2 pi)] for integer k >= 1."""
    k = np.asarray(k, dtype=float)
    out = np.empty_like(k)
    small = k <= _STIRLING_DIRECT_LIMIT
    ks = k[small]
    out[small] = gammaln(ks + 1.0) - (ks + 0.5) * np.log(ks) + ks - _HALF_LOG_2PI
    kb = k[~small]
    kk = kb * kb
    out[~small] = (_S0 - (_S1 - (_S2 - (_S3 - _S4 / kk) / kk) / kk) / kk) / kb
    return out


def _deviance(k: np.ndarray, u: np.ndarray) -> np.ndarray:
    """k log(k/u) + u - k, evaluated without cancellation near k = u."""
    e = (k - u) / u
    return u * ((1.0 + e) * np.log1p(e) - e)


def log_erlang_weight(k, u) -> np.ndarray:
    """
    log of u^k e^{-u} / k!, broadcasting k against u.

    This is the Erlang density in the scaled variable u = n t.
    """
    k = np.asarray(k, dtype=float)
    u = np.asarray(u, dtype=float)
    k, u = np.broadcast_arrays(k, u)
    out = np.empty(k.shape, dtype=float)
    zero_k = k == 0
    out[zero_k] = -u[zero_k]
    rest = ~zero_k
    kr, ur = k[rest], u[rest]
    with np.errstate(divide="ignore", invalid="ignore"):
        positive = ur > 0
        vals = np.full(kr.shape, -np.inf)
        kp, up = kr[positive], ur[positive]
        vals[positive] = -_deviance(kp, up) - _stirling_error(kp) - 0.5 * np.log(2.0 * np.pi * kp)
    out[rest] = vals
    return out


# ============================================
# Baskakov weights
# ============================================

def _success_probability(params: OperatorParams, x: float) -> float:
    return 1.0 / (1.0 + params.c * x)


def baskakov_weight(params: OperatorParams, k, x: float):
    """
    p_{n,k}(x) = (n/c)_k (cx)^k / (k! (1+cx)^{n/c+k}).

    ``k`` may be an integer or an integer array; the result has the same shape.
    """
    if x < 0:
        raise DomainError("x must be nonnegative", x=x)
    k_arr = np.asarray(k)
    if x == 0:
        result = np.where(k_arr == 0, 1.0, 0.0)
    else:
        result = nbinom.pmf(k_arr, params.size, _success_probability(params, x))
    return float(result) if np.ndim(result) == 0 else np.asarray(result, dtype=float)


def log_baskakov_weight(params: OperatorParams, k: int, x: float) -> float:
    """log p_{n,k}(x) through the Pochhammer symbol; -inf where the weight vanishes."""
    if x < 0:
        raise DomainError("x must be nonnegative", x=x)
    if k < 0:
        return -math.inf
    if x == 0:
        return 0.0 if k == 0 else -math.inf
    cx = params.c * x
    return (
        log_pochhammer(params.size, k)
        - float(gammaln(k + 1.0))
        + k * math.log(cx)
        - (params.size + k) * math.log1p(cx)
    )


def baskakov_weight_derivative(params: OperatorParams, k, x: float):
    """d/dx p_{n,k}(x) = n (p_{n+c,k-1}(x) - p_{n+c,k}(x)), with p_{.,-1} = 0."""
    if x <= 0:
        raise DomainError("derivative requires x > 0", x=x)
    shifted = params.shifted(1)
    k_arr = np.asarray(k)
    lower = np.where(k_arr >= 1, baskakov_weight(shifted, np.maximum(k_arr - 1, 0), x), 0.0)
    result = params.n * (lower - baskakov_weight(shifted, k_arr, x))
    return float(result) if np.ndim(result) == 0 else np.asarray(result, dtype=float)


def printed_weight_derivative(params: OperatorParams, k, x: float):
    """n (p_{n+1,k-1}(x) - p_{n+1,k}(x)); agrees with the exact derivative only at c = 1."""
    if x <= 0:
        raise DomainError("derivative requires x > 0", x=x)
    shifted = params.model_copy(update={"n": params.n + 1.0})
    k_arr = np.asarray(k)
    lower = np.where(k_arr >= 1, baskakov_weight(shifted, np.maximum(k_arr - 1, 0), x), 0.0)
    result = params.n * (lower - baskakov_weight(shifted, k_arr, x))
    return float(result) if np.ndim(result) == 0 else np.asarray(result, dtype=float)


# ============================================
# Erlang densities
# ============================================

def erlang_density(n: float, k, t):
    """theta_{n,k}(t) = n e^{-nt} (nt)^k / k!."""
    if n <= 0:
        raise DomainError("n must be positive", n=n)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("t must be nonnegative", n=n)
    k_arr = np.asarray(k)
    u = n * t_arr
    zero = (u == 0)
    with np.errstate(divide="ignore"):
        dens = n * np.exp(log_erlang_weight(k_arr, u))
    dens = np.where(zero & (k_arr == 0), n, np.where(zero, 0.0, dens))
    return float(dens) if np.ndim(dens) == 0 else dens


# ============================================
# Truncation windows
# ============================================

def truncation_window(
    params: OperatorParams,
    x: float,
    tolerance: float = 1e-14,
    cap: int = 10_000_000,
    tilt: float = 1.0,
    degree: int = 0,
) -> TruncationWindow:
    """
    Smallest contiguous k-range holding at least 1 - tolerance of the Baskakov mass.

    The window is widened to also cover the mass of the reweighted series when the
    integrand grows: ``tilt`` > 1 for p_{n,k}(x) tilt^k (growth e^{γt}, tilt = n/(n-γ)),
    ``degree`` > 0 for p_{n,k}(x) k^degree (growth (1+t)^degree), which is the
    negative binomial of size n/c + degree shifted by degree.
    """
    if not 0 < tolerance <= 1e-3:
        raise DomainError("tolerance must lie in (0, 1e-3]", tolerance=tolerance)
    if x < 0:
        raise DomainError("x must be nonnegative", x=x)
    if x == 0:
        return TruncationWindow(k_lo=0, k_hi=0, captured_mass=1.0, tolerance=tolerance)

    p = _success_probability(params, x)
    k_lo, k_hi, mass, saturated = _scan_window(params.size, p, params, x, tolerance, cap)
    probabilities = [p]
    if tilt > 1.0:
        q_tilted = (1.0 - p) * tilt
        if q_tilted >= 1.0:
            raise GrowthError("integrand growth makes the series diverge at this x", n=params.n, x=x, tilt=tilt)
        probabilities.append(1.0 - q_tilted)
    variants = [(params.size, prob, 0) for prob in probabilities[1:]]
    if degree > 0:
        variants += [(params.size + degree, prob, degree) for prob in probabilities]

    lo, hi = k_lo, k_hi
    for size, prob, shift in variants:
        v_lo, v_hi, _, v_saturated = _scan_window(size, prob, params, x, tolerance, cap)
        saturated |= v_saturated
        lo, hi = min(lo, v_lo), max(hi, v_hi + shift)
    if hi > cap:
        raise TruncationCapError("truncation window exceeds hard cap", n=params.n, c=params.c, x=x, k=hi, cap=cap)
    if (lo, hi) != (k_lo, k_hi):
        k_lo, k_hi = lo, hi
        mass = math.fsum(baskakov_weight(params, np.arange(k_lo, k_hi + 1), x))
    return TruncationWindow(k_lo=k_lo, k_hi=k_hi, captured_mass=min(mass, 1.0), tolerance=tolerance,
                            saturated=saturated)


def _scan_window(size: float, p: float, params: OperatorParams, x: float, tolerance: float, cap: int):
    """Window of NB(size, p) by outward doubling around the mode, then minimal top-mass set."""
    q = 1.0 - p
    mean = size * q / p
    sd = math.sqrt(size * q) / p
    mode = int(math.floor(mean))
    half = int(math.ceil(10.0 * sd + 20.0))
    previous = -1.0
    while True:
        lo = max(0, mode - half)
        hi = mode + half
        if hi > cap:
            raise TruncationCapError("truncation window exceeds hard cap", n=params.n, c=params.c, x=x, k=hi, cap=cap)
        ks = np.arange(lo, hi + 1)
        pk = nbinom.pmf(ks, size, p)
        total = math.fsum(pk)
        if total >= 1.0 - 0.5 * tolerance or total <= previous:
            break
        previous = total
        half *= 2

    order = np.argsort(-pk, kind="stable")
    cumulative = np.cumsum(pk[order])
    m = int(np.searchsorted(cumulative, 1.0 - tolerance)) + 1
    saturated = m > order.size
    if saturated:
        if total < 1.0 - tolerance - _MASS_ROUNDING:
            raise TruncationCapError(
                "negative binomial mass stalled below 1 - tolerance",
                n=params.n, c=params.c, x=x, mass=total, tolerance=tolerance,
            )
        logger.warning(
            "⚠️ Window mass %.17g below 1 - %g at rounding level (n=%s, c=%s, x=%s); keeping full scan",
            total, tolerance, params.n, params.c, x,
        )
        m = order.size
    chosen = order[:m]
    k_lo, k_hi = lo + int(chosen.min()), lo + int(chosen.max())
    mass = math.fsum(pk[k_lo - lo:k_hi - lo + 1])
    return k_lo, k_hi, mass, saturated


def window_for(params: OperatorParams, x: float, tolerance: float, cap: int, growth_rate: float = 0.0,
               kernel_n: Optional[float] = None, growth_degree: int = 0) -> TruncationWindow:
    """Window adjusted for an integrand growing like (1+t)^growth_degree e^{growth_rate t} against kernel index n."""
    kernel_n = params.n if kernel_n is None else kernel_n
    if growth_rate >= kernel_n:
        raise GrowthError("growth rate must be below n", n=kernel_n, growth_rate=growth_rate)
    tilt = kernel_n / (kernel_n - growth_rate) if growth_rate > 0 else 1.0
    return truncation_window(params, x, tolerance, cap, tilt=tilt, degree=growth_degree)
