"""
Experiment harness for the operator's convergence theory.

Experiments:
- simultaneous convergence of normalized derivatives
- Voronovskaja limits, with both first-order coefficient variants carried through
- the pointwise bound with q_n(x, r), the global rate on an inner interval
- Steklov mean properties, central-moment orders, tail decay
- transfer-identity and basis-derivative discrepancy reports

Every experiment returns an ExperimentReport; grid points run through
``run_grid`` and rows are assembled in grid order.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from hybridop.core.config import get_settings
from hybridop.core.errors import DomainError, InsufficientDataError
from hybridop.schemas.functions import FunctionSpec
from hybridop.schemas.params import EvalConfig, IntervalPair, OperatorParams, default_eval_config
from hybridop.schemas.report import ExperimentReport, ReportRow, Verdict
from hybridop.services.basis import baskakov_weight, baskakov_weight_derivative, printed_weight_derivative
from hybridop.services.moments import central_moment_recurrence, lambda_norm, transformed_second_central_moment
from hybridop.services.operator import (
    apply,
    apply_transformed_printed,
    derivative_of_operator,
    tail_mass,
)
from hybridop.services.smoothing import modulus_of_smoothness, steklov_mean, sup_norm
from hybridop.tasks.sweeps import run_grid
from hybridop.utils.numerics import five_point_derivative, local_orders, loglog_slope, richardson_extrapolate

logger = logging.getLogger(__name__)

_TINY = 1e-300


# ============================================
# Order fitting
# ============================================

def fit_order(pairs: Sequence[Tuple[float, float]], noise_floor: Optional[float] = None) -> float:
    """Least-squares slope of log error against log n over pairs above the noise floor."""
    floor = get_settings().fit_noise_floor if noise_floor is None else noise_floor
    usable = [(n, e) for n, e in pairs if e > floor and n > 0]
    if len(usable) < 4:
        raise InsufficientDataError("order fit needs at least 4 pairs above the noise floor",
                                    usable=len(usable), noise_floor=floor)
    ns, errs = zip(*usable)
    return loglog_slope(ns, errs)


def _try_fit(pairs: Sequence[Tuple[float, float]], noise_floor: float) -> Optional[float]:
    try:
        return fit_order(pairs, noise_floor)
    except InsufficientDataError:
        return None


def _safe_ratio(num: float, den: float, floor: float = 1e-12) -> float:
    """num/den; a denominator at or below ``floor`` counts as zero."""
    if den > max(floor, _TINY):
        return num / den
    return 0.0 if num <= floor else math.inf


def _params(n: float, c: float) -> OperatorParams:
    return OperatorParams(n=n, c=c)


def normalized_derivative(f: FunctionSpec, s: int, x: float, params: OperatorParams,
                          cfg: Optional[EvalConfig] = None) -> float:
    """(1/lambda_n(c, s)) d^s/dx^s L_{n,c} f(x)."""
    value = derivative_of_operator(f, s, x, params, cfg).value
    return value / lambda_norm(params, s).value


# ============================================
# Simultaneous convergence
# ============================================

def simultaneous_convergence_experiment(
    f: FunctionSpec,
    s: int,
    x_grid: Sequence[float],
    n_sweep: Sequence[float],
    c: float,
    cfg: Optional[EvalConfig] = None,
    workers: Optional[int] = None,
) -> ExperimentReport:
    """Errors of (1/lambda_n) d^s L_{n,c} f - f^(s) over the n-sweep."""
    cfg = cfg or default_eval_config()
    settings = get_settings()
    f_s = f.derivative_spec(s)
    points = [(n, x) for n in n_sweep for x in x_grid]
    observed = run_grid(lambda p: normalized_derivative(f, s, p[1], _params(p[0], c), cfg), points, workers)
    rows = [
        ReportRow.build(f"x={x:.17g};s={s}", n, obs, float(f_s(x)))
        for (n, x), obs in zip(points, observed)
    ]
    sup_errors = _sup_by_n(rows, n_sweep)
    monotone = all(b <= a + settings.noise_floor for a, b in zip(sup_errors[:-1], sup_errors[1:]))
    fitted = _try_fit(list(zip(n_sweep, sup_errors)), settings.noise_floor)
    ok = monotone and (fitted is None or fitted <= -0.9)
    verdict = Verdict.PASS if ok else Verdict.FAIL
    summary = (f"sup errors {sup_errors[0]:.3g} -> {sup_errors[-1]:.3g}, "
               f"fitted order {fitted if fitted is None else round(fitted, 3)}")
    _log_outcome("simultaneous convergence", verdict, summary)
    return ExperimentReport(
        name="simultaneous-convergence",
        rows=rows,
        fitted_order=fitted,
        verdict=verdict,
        summary=summary,
        metadata={"s": s, "c": c, "label": f.label, "sup_errors": sup_errors, "monotone": monotone},
    )


def _sup_by_n(rows: List[ReportRow], n_sweep: Sequence[float]) -> List[float]:
    return [max(row.abs_err for row in rows if row.n == float(n)) for n in n_sweep]


# ============================================
# Voronovskaja
# ============================================

@dataclass(frozen=True)
class VoronovskajaRHS:
    """
    Right-hand side A(x) f^(s+1)(x) + B(x) f^(s+2)(x) of the Voronovskaja limit.

    Two first-order coefficients are carried: the printed (cx + s + 1) and the one
    the expansion produces, 1 + s(1 + cx). They coincide at s = 1 and at x = 0.
    """
    s: int
    c: float

    def coefficient_first(self, x: float, variant: str = "proof") -> float:
        if variant == "proof":
            return 1.0 + self.s * (1.0 + self.c * x)
        if variant == "printed":
            return self.c * x + self.s + 1.0
        raise DomainError("unknown coefficient variant", variant=variant)

    def coefficient_second(self, x: float) -> float:
        return x * (2.0 + self.c * x) / 2.0

    def terms(self, f: FunctionSpec, x: float, variant: str = "proof") -> Tuple[float, float]:
        d1 = float(f.derivative_spec(self.s + 1)(x))
        d2 = float(f.derivative_spec(self.s + 2)(x))
        return self.coefficient_first(x, variant) * d1, self.coefficient_second(x) * d2

    def value(self, f: FunctionSpec, x: float, variant: str = "proof") -> float:
        first, second = self.terms(f, x, variant)
        return first + second


def voronovskaja_experiment(
    f: FunctionSpec,
    s: int,
    x: float,
    c: float,
    n_sweep: Optional[Sequence[float]] = None,
    cfg: Optional[EvalConfig] = None,
    workers: Optional[int] = None,
) -> ExperimentReport:
    """g(n) = n((1/lambda_n) d^s L f(x) - f^(s)(x)), extrapolated and compared to both variants."""
    if x <= 0:
        raise DomainError("Voronovskaja point must be positive", x=x)
    cfg = cfg or default_eval_config()
    settings = get_settings()
    n_sweep = list(n_sweep or settings.default_n_sweep)
    if len(n_sweep) < 2:
        raise InsufficientDataError("Voronovskaja extrapolation needs at least two n values", count=len(n_sweep))
    target = float(f.derivative_spec(s)(x))
    observed = run_grid(lambda n: normalized_derivative(f, s, x, _params(n, c), cfg), n_sweep, workers)
    g = [n * (obs - target) for n, obs in zip(n_sweep, observed)]
    ratio = n_sweep[-1] / n_sweep[-2]
    limit = richardson_extrapolate(g[-2:], p=1, r=ratio)

    rhs = VoronovskajaRHS(s=s, c=c)
    proof_terms = rhs.terms(f, x, "proof")
    printed_terms = rhs.terms(f, x, "printed")
    proof, printed = sum(proof_terms), sum(printed_terms)
    tol_proof = max(settings.voronovskaja_tolerance * max(abs(proof), sum(map(abs, proof_terms))), settings.noise_floor)
    tol_printed = max(settings.voronovskaja_tolerance * max(abs(printed), sum(map(abs, printed_terms))),
                      settings.noise_floor)
    supports_proof = abs(limit - proof) <= tol_proof
    supports_printed = abs(limit - printed) <= tol_printed

    if supports_proof and supports_printed:
        verdict, summary = Verdict.PASS, "supports both coefficient variants"
    elif supports_proof:
        verdict, summary = Verdict.DISCREPANCY_LOGGED, "supports proof-internal coefficient"
        logger.warning("⚠️ Printed first-order coefficient (cx+s+1) contradicted at s=%d, c=%s, x=%s: "
                       "limit %.10g vs printed %.10g", s, c, x, limit, printed)
    elif supports_printed:
        verdict, summary = Verdict.DISCREPANCY_LOGGED, "supports printed coefficient"
    else:
        verdict, summary = Verdict.FAIL, "supports neither coefficient"
    summary = f"{summary} (limit {limit:.10g}, proof-internal {proof:.10g}, printed {printed:.10g})"

    rows = [ReportRow.build(f"x={x:.17g};s={s}", n, gn, proof) for n, gn in zip(n_sweep, g)]
    fitted = None
    if len(n_sweep) >= 6:
        fitted = _try_fit([(n, abs(gn - limit)) for n, gn in zip(n_sweep[:-2], g[:-2])], settings.noise_floor)
    _log_outcome("voronovskaja", verdict, summary)
    return ExperimentReport(
        name="voronovskaja",
        rows=rows,
        fitted_order=fitted,
        verdict=verdict,
        summary=summary,
        metadata={
            "s": s, "c": c, "x": x, "label": f.label,
            "limit": limit, "g": g,
            "proof_internal": proof, "printed": printed,
            "supports_proof_internal": supports_proof, "supports_printed": supports_printed,
        },
    )


def voronovskaja_s0_remark(
    f: FunctionSpec,
    x: float,
    c: float,
    n_sweep: Optional[Sequence[float]] = None,
    cfg: Optional[EvalConfig] = None,
    workers: Optional[int] = None,
) -> ExperimentReport:
    """s = 0 Voronovskaja report plus the c -> 1 path towards the Baskakov-Szász limit."""
    report = voronovskaja_experiment(f, 0, x, c, n_sweep, cfg, workers)
    d1 = float(f.derivative_spec(1)(x))
    d2 = float(f.derivative_spec(2)(x))
    reduction = (x + 1.0) * d1 + x * (x + 2.0) / 2.0 * d2
    path = []
    for ci in sorted({c, 0.9, 0.99, 0.999, 1.0}):
        if ci < c:
            continue
        rhs = VoronovskajaRHS(s=0, c=ci)
        path.append({"c": ci, "proof_internal": rhs.value(f, x, "proof"), "printed": rhs.value(f, x, "printed")})
    metadata = dict(report.metadata)
    metadata["baskakov_szasz_reduction"] = reduction
    metadata["c_path"] = path
    if c != 1.0:
        at_one = voronovskaja_experiment(f, 0, x, 1.0, n_sweep, cfg, workers)
        metadata["limit_at_c1"] = at_one.metadata["limit"]
    else:
        metadata["limit_at_c1"] = report.metadata["limit"]
    return report.model_copy(update={"name": "voronovskaja-s0-remark", "metadata": metadata})


# ============================================
# Pointwise bound with q_n(x, r)
# ============================================

def qn_reference(params: OperatorParams, r: int, x: float) -> float:
    """Printed q_n(x, r) = sqrt(n x(cx+2) + r(x(cx+4)+3) + r^2 (x+1)^2 + 2)."""
    n, c = params.n, params.c
    return math.sqrt(n * x * (c * x + 2) + r * (x * (c * x + 4) + 3) + r * r * (x + 1) ** 2 + 2)


def pointwise_bound_check(
    f: FunctionSpec,
    r: int,
    n_values: Sequence[float],
    x_values: Sequence[float],
    c: float,
    cfg: Optional[EvalConfig] = None,
    workers: Optional[int] = None,
    lipschitz_alpha: Optional[float] = None,
) -> ExperimentReport:
    """|d^r L f(x) - f^(r)(x)| against 2 omega(f^(r), q/n) with numeric and printed q."""
    cfg = cfg or default_eval_config()
    settings = get_settings()
    f_r = f.derivative_spec(r)
    points = [(n, x) for n in n_values for x in x_values]

    def evaluate(point: Tuple[float, float]) -> Dict[str, float]:
        n, x = point
        params = _params(n, c)
        lhs = abs(derivative_of_operator(f, r, x, params, cfg).value - float(f_r(x)))
        second = transformed_second_central_moment(params, r, x, cfg).numeric
        delta_num = math.sqrt(max(second, 0.0))
        delta_ref = qn_reference(params, r, x) / n
        upper = x + 10.0 * max(delta_num, delta_ref) + 2.0
        interval = (0.0, upper)
        rhs_num = 2.0 * modulus_of_smoothness(f_r, 1, delta_num, interval)
        rhs_ref = 2.0 * modulus_of_smoothness(f_r, 1, delta_ref, interval)
        result = {"lhs": lhs, "rhs_numeric": rhs_num, "rhs_printed": rhs_ref, "delta": delta_num}
        if lipschitz_alpha is not None:
            steps = [delta_num / 2 ** j for j in range(5)]
            constant = max(modulus_of_smoothness(f_r, 1, d, interval) / d ** lipschitz_alpha for d in steps)
            result["lipschitz_rhs"] = 2.0 * constant * delta_num ** lipschitz_alpha
        return result

    results = run_grid(evaluate, points, workers)
    slack = 1e-12
    rows = []
    violations_num = violations_ref = violations_lip = 0
    for (n, x), res in zip(points, results):
        rows.append(ReportRow.build(f"x={x:.17g};r={r}", n, res["lhs"], res["rhs_numeric"]))
        violations_num += res["lhs"] > res["rhs_numeric"] + slack
        violations_ref += res["lhs"] > res["rhs_printed"] + slack
        if "lipschitz_rhs" in res:
            violations_lip += res["lhs"] > res["lipschitz_rhs"] + slack
    sup_lhs = [max(res["lhs"] for (n, _), res in zip(points, results) if n == nv) for nv in n_values]
    fitted = _try_fit(list(zip(n_values, sup_lhs)), settings.noise_floor)
    verdict = Verdict.PASS if violations_num == 0 else Verdict.FAIL
    summary = f"{len(points) - violations_num}/{len(points)} grid points within the numeric-q bound"
    _log_outcome("pointwise bound", verdict, summary)
    metadata: Dict[str, Any] = {
        "r": r, "c": c, "label": f.label,
        "violations_numeric_q": violations_num, "violations_printed_q": violations_ref,
        "rhs_printed_q": [res["rhs_printed"] for res in results],
    }
    if lipschitz_alpha is not None:
        metadata["lipschitz_alpha"] = lipschitz_alpha
        metadata["violations_lipschitz"] = violations_lip
        metadata["rhs_lipschitz"] = [res["lipschitz_rhs"] for res in results]
    return ExperimentReport(name="pointwise-bound", rows=rows, fitted_order=fitted, verdict=verdict,
                            summary=summary, metadata=metadata)


# ============================================
# Global rate on an inner interval
# ============================================

def global_rate_experiment(
    f: FunctionSpec,
    r: int,
    intervals: IntervalPair,
    c: float,
    n_sweep: Sequence[float],
    cfg: Optional[EvalConfig] = None,
    workers: Optional[int] = None,
    grid_points: Optional[int] = None,
) -> ExperimentReport:
    """Sup-norm error of d^r L f on [a1, b1] against n^{-1}||f|| + omega_2(f^(r), n^{-1/2}, [a1, b1])."""
    cfg = cfg or default_eval_config()
    settings = get_settings()
    grid_points = grid_points or settings.sup_grid_points
    f_r = f.derivative_spec(r)
    xs = np.linspace(intervals.a1, intervals.b1, grid_points)
    points = [(n, float(x)) for n in n_sweep for x in xs]
    values = run_grid(lambda p: derivative_of_operator(f, r, p[1], _params(p[0], c), cfg).value, points, workers)
    errors = np.abs(np.asarray(values) - f_r(np.asarray([p[1] for p in points]))).reshape(len(n_sweep), grid_points)
    sup_errors = [float(v) for v in errors.max(axis=1)]
    f_norm = sup_norm(f, intervals.outer)
    envelopes = [f_norm / n + modulus_of_smoothness(f_r, 2, n ** -0.5, intervals.inner) for n in n_sweep]
    ratios = [_safe_ratio(e, env) for e, env in zip(sup_errors, envelopes)]
    fitted = _try_fit(list(zip(n_sweep, sup_errors)), settings.noise_floor)

    if all(e <= settings.noise_floor for e in sup_errors):
        spread = 1.0
    else:
        positive = [q for q in ratios if q > 0]
        spread = max(ratios) / min(positive) if positive and min(ratios) > 0 else math.inf
    verdict = Verdict.PASS if spread <= settings.ratio_spread_limit else Verdict.FAIL
    summary = (f"empirical C in [{min(ratios):.3g}, {max(ratios):.3g}], spread {spread:.3g}, "
               f"fitted order {fitted if fitted is None else round(fitted, 3)}")
    _log_outcome("global rate", verdict, summary)
    rows = [ReportRow.build(f"[{intervals.a1:g},{intervals.b1:g}];r={r}", n, e, env)
            for n, e, env in zip(n_sweep, sup_errors, envelopes)]
    return ExperimentReport(
        name="global-rate",
        rows=rows,
        fitted_order=fitted,
        verdict=verdict,
        summary=summary,
        metadata={"r": r, "c": c, "label": f.label, "empirical_constants": ratios, "spread": spread,
                  "f_norm": f_norm, "grid_points": grid_points},
    )


# ============================================
# Steklov properties
# ============================================

def steklov_property_report(
    f: FunctionSpec,
    s: int,
    intervals: IntervalPair,
    h_grid: Sequence[float],
    grid_points: Optional[int] = None,
    quad_points_per_axis: Optional[int] = None,
) -> ExperimentReport:
    """
    Empirical constants of the Steklov mean properties for each h:

    - (b) h^r ||f_h^(r)|| / omega_r (r < s) and h^s ||f_h^(s)|| / omega_s
    - (c) ||f - f_h|| / omega_s
    - (d) ||f_h|| / ||f||_[a,b]
    - (e) h^s ||f_h^(s)|| / ||f||_[a,b]
    """
    h_grid = list(h_grid)
    if any(b >= a for a, b in zip(h_grid[:-1], h_grid[1:])):
        raise DomainError("h grid must be strictly decreasing", h_grid=h_grid)
    settings = get_settings()
    grid_points = grid_points or settings.sup_grid_points
    ts = np.concatenate([np.linspace(intervals.a1, intervals.b1, grid_points),
                         [k for k in f.kinks if intervals.a1 <= k <= intervals.b1]])
    f_vals = f(ts)
    f_norm = sup_norm(f, intervals.outer)
    # moduli at this level mean f is annihilated by the difference
    rounding = 1e-12 * max(1.0, f_norm)

    constants: Dict[str, List[float]] = {}
    printed_b: Dict[str, List[float]] = {}
    rows: List[ReportRow] = []
    approx_errors: List[float] = []

    def record(prop: str, h: float, num: float, den: float) -> None:
        constants.setdefault(prop, []).append(_safe_ratio(num, den, rounding))
        rows.append(ReportRow.build(f"h={h:.17g};property={prop}", 1.0 / h, num, den))

    for h in h_grid:
        mean = steklov_mean(f, h, s, intervals, quad_points_per_axis)
        omega_s = modulus_of_smoothness(f, s, h, intervals.outer)
        err = float(np.max(np.abs(f_vals - mean(ts))))
        approx_errors.append(err)
        for r in range(1, s + 1):
            d_norm = float(np.max(np.abs(mean.derivative(r, ts))))
            if r < s:
                omega_r = modulus_of_smoothness(f, r, h, intervals.outer)
                record(f"b{r}", h, h ** r * d_norm, omega_r)
                printed_b.setdefault(f"b{r}", []).append(_safe_ratio(h ** r * d_norm, omega_s, rounding))
            else:
                record(f"b{r}", h, h ** r * d_norm, omega_s)
                record("e", h, h ** r * d_norm, f_norm)
        record("c", h, err, omega_s)
        record("d", h, float(np.max(np.abs(mean(ts)))), f_norm)

    growth = {prop: _growth(values) for prop, values in constants.items()}
    printed_growth = {prop: _growth(values) for prop, values in printed_b.items()}
    non_growing = all(g <= settings.growth_slack for g in growth.values())
    printed_grows = any(g > settings.growth_slack for g in printed_growth.values())
    if not non_growing:
        verdict = Verdict.FAIL
    elif printed_grows:
        verdict = Verdict.DISCREPANCY_LOGGED
        logger.warning("⚠️ Derivative bound with omega_s grows for r < s (%s); omega_r form holds", f.label)
    else:
        verdict = Verdict.PASS
    fitted = _try_fit([(1.0 / h, e) for h, e in zip(h_grid, approx_errors)], settings.fit_noise_floor)
    summary = ", ".join(f"{prop}: C<={max(vals):.3g}" for prop, vals in sorted(constants.items()))
    _log_outcome("steklov properties", verdict, summary)
    return ExperimentReport(
        name="steklov-properties",
        rows=rows,
        fitted_order=fitted,
        verdict=verdict,
        summary=summary,
        metadata={
            "s": s, "label": f.label, "h_grid": h_grid,
            "empirical_constants": constants, "max_constants": {p: max(v) for p, v in constants.items()},
            "growth": growth, "printed_b_constants": printed_b, "printed_b_growth": printed_growth,
        },
    )


def _growth(values: Sequence[float]) -> float:
    """Largest constant relative to the first; 1 when all sit at rounding level, inf when any bound is degenerate."""
    if not all(math.isfinite(v) for v in values):
        return math.inf
    first = values[0]
    later = max(values)
    if later <= 1e-12:
        return 1.0
    return later / first if first > _TINY else math.inf


# ============================================
# Moments and tails
# ============================================

def central_moment_order_experiment(
    c: float,
    m: int,
    n_sweep: Sequence[float] = (50, 100, 200, 400, 800),
    x: float = 1.0,
) -> ExperimentReport:
    """
    Decay order of mu_{n,2m}(x) in n, compared with -m.

    n^m mu_{n,2m}(x) is a polynomial in 1/n, so the raw least-squares slope carries an O(1/n)
    bias on short sweeps. On a geometric sweep the local doubling slopes are Richardson
    extrapolated; the raw slope is kept in metadata.
    """
    n_sweep = list(n_sweep)
    values = [float(central_moment_recurrence(_params(n, c), 2 * m)[2 * m](x)) for n in n_sweep]
    raw_slope = fit_order(list(zip(n_sweep, values)))
    ratios = np.diff(np.log(n_sweep))
    if np.allclose(ratios, ratios[0], rtol=1e-9):
        fitted = richardson_extrapolate(local_orders(n_sweep, values), p=1, r=float(np.exp(ratios[0])))
    else:
        fitted = raw_slope
    verdict = Verdict.PASS if abs(fitted + m) <= 0.1 else Verdict.FAIL
    summary = (f"mu_{2 * m} decays with order {fitted:.4f} (raw slope {raw_slope:.4f}, expected {-m}); "
               f"printed exponent +{m} is not sharp")
    rows = [ReportRow.build(f"x={x:.17g};m={2 * m}", n, v, 0.0) for n, v in zip(n_sweep, values)]
    _log_outcome("central moment order", verdict, summary)
    return ExperimentReport(
        name="central-moment-order",
        rows=rows,
        fitted_order=fitted,
        verdict=verdict,
        summary=summary,
        metadata={"c": c, "m": m, "x": x, "printed_exponent": m, "raw_slope": raw_slope},
    )


def tail_decay_experiment(
    x: float,
    delta: float,
    gamma: float,
    c: float,
    n_sweep: Sequence[float],
    cfg: Optional[EvalConfig] = None,
    workers: Optional[int] = None,
) -> ExperimentReport:
    """tail_mass along the sweep; passes when strictly decreasing with log-log slope below -3."""
    cfg = cfg or default_eval_config()
    masses = run_grid(lambda n: tail_mass(_params(n, c), x, delta, gamma, cfg), list(n_sweep), workers)
    decreasing = all(b < a for a, b in zip(masses[:-1], masses[1:]))
    fitted = _try_fit(list(zip(n_sweep, masses)), 0.0)
    ok = decreasing and fitted is not None and fitted < -3.0
    verdict = Verdict.PASS if ok else Verdict.FAIL
    summary = f"tail mass {masses[0]:.3g} -> {masses[-1]:.3g}, slope {fitted if fitted is None else round(fitted, 3)}"
    rows = [ReportRow.build(f"x={x:.17g};delta={delta:.17g};gamma={gamma:.17g}", n, m, 0.0)
            for n, m in zip(n_sweep, masses)]
    _log_outcome("tail decay", verdict, summary)
    return ExperimentReport(name="tail-decay", rows=rows, fitted_order=fitted, verdict=verdict, summary=summary,
                            metadata={"x": x, "delta": delta, "gamma": gamma, "c": c, "decreasing": decreasing})


# ============================================
# Transfer identity and basis derivative
# ============================================

def finite_difference_derivative(
    f: FunctionSpec,
    r: int,
    x: float,
    params: OperatorParams,
    cfg: Optional[EvalConfig] = None,
    h: Optional[float] = None,
) -> float:
    """Five-point derivative of x -> L_{n,c} f(x), step max(1e-4, 1e-4 x)."""
    h = h or max(1e-4, 1e-4 * x)
    if x - 2 * h < 0:
        raise DomainError("finite-difference stencil leaves [0, inf)", x=x, h=h)
    return five_point_derivative(lambda y: apply(f, y, params, cfg).value, x, r, h)


def transfer_identity_report(
    f: FunctionSpec,
    r: int,
    x_grid: Sequence[float],
    params: OperatorParams,
    cfg: Optional[EvalConfig] = None,
    workers: Optional[int] = None,
    rel_tolerance: float = 1e-4,
) -> ExperimentReport:
    """derivative_of_operator against finite differences, with the printed n + r form alongside."""
    cfg = cfg or default_eval_config()
    f_r = f.derivative_spec(r)

    def evaluate(x: float) -> Tuple[float, float, float]:
        return (
            derivative_of_operator(f, r, x, params, cfg).value,
            finite_difference_derivative(f, r, x, params, cfg),
            apply_transformed_printed(f_r, r, x, params, cfg).value,
        )

    results = run_grid(evaluate, list(x_grid), workers)
    rows = [ReportRow.build(f"x={x:.17g};r={r}", params.n, exact, fd) for x, (exact, fd, _) in zip(x_grid, results)]
    printed_gaps = [abs(pr - fd) / max(abs(fd), _TINY) for _, fd, pr in results]
    exact_ok = all(row.rel_err <= rel_tolerance for row in rows)
    printed_ok = all(gap <= rel_tolerance for gap in printed_gaps)
    if not exact_ok:
        verdict = Verdict.FAIL
    elif not printed_ok:
        verdict = Verdict.DISCREPANCY_LOGGED
        logger.warning("⚠️ Printed transfer form (shift n+r, no normalizer) deviates by up to %.3g at c=%s, r=%d",
                       max(printed_gaps), params.c, r)
    else:
        verdict = Verdict.PASS
    summary = f"max rel deviation {max(row.rel_err for row in rows):.3g}; printed form {max(printed_gaps):.3g}"
    return ExperimentReport(name="transfer-identity", rows=rows, verdict=verdict, summary=summary,
                            metadata={"r": r, "n": params.n, "c": params.c, "label": f.label,
                                      "printed_relative_gaps": printed_gaps})


def weight_derivative_report(
    params: OperatorParams,
    x_values: Sequence[float],
    k_max: int = 200,
    rel_tolerance: float = 1e-6,
) -> ExperimentReport:
    """Basis derivative identity (shift n + c) against central differences; printed n + 1 form measured against it."""
    ks = np.arange(k_max + 1)
    rows: List[ReportRow] = []
    printed_gap = 0.0
    exact_ok = True
    for x in x_values:
        h = 1e-6 * max(1.0, x)
        fd = (baskakov_weight(params, ks, x + h) - baskakov_weight(params, ks, x - h)) / (2 * h)
        exact = baskakov_weight_derivative(params, ks, x)
        printed = printed_weight_derivative(params, ks, x)
        scale = max(float(np.max(np.abs(fd))), _TINY)
        exact_ok &= bool(np.all(np.abs(exact - fd) <= rel_tolerance * np.maximum(np.abs(fd), scale)))
        printed_gap = max(printed_gap, float(np.max(np.abs(printed - exact))) / scale)
        rows.extend(ReportRow.build(f"x={x:.17g};k={k}", params.n, float(e), float(d))
                    for k, e, d in zip(ks, exact, fd))
    if not exact_ok:
        verdict = Verdict.FAIL
    elif printed_gap > rel_tolerance:
        verdict = Verdict.DISCREPANCY_LOGGED
    else:
        verdict = Verdict.PASS
    summary = f"printed n+1 shift deviates from the exact derivative by {printed_gap:.3g} (relative to max |p'|)"
    return ExperimentReport(name="weight-derivative", rows=rows, verdict=verdict, summary=summary,
                            metadata={"n": params.n, "c": params.c, "printed_gap": printed_gap})


def _log_outcome(name: str, verdict: Verdict, summary: str) -> None:
    if verdict == Verdict.FAIL:
        logger.info("❌ %s: %s", name, summary)
    else:
        logger.info("✅ %s [%s]: %s", name, verdict.value, summary)
