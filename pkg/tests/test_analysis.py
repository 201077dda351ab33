"""Tests for the experiment harness: order fits, Voronovskaja limits, bounds and reports."""

import math

import numpy as np
import pytest

from hybridop.core.config import get_settings
from hybridop.core.errors import DomainError, InsufficientDataError
from hybridop.schemas.params import EvalConfig, IntervalPair, OperatorParams
from hybridop.schemas.report import Verdict
from hybridop.services.analysis import (
    VoronovskajaRHS,
    fit_order,
    global_rate_experiment,
    pointwise_bound_check,
    qn_reference,
    simultaneous_convergence_experiment,
    steklov_property_report,
    tail_decay_experiment,
    transfer_identity_report,
    voronovskaja_experiment,
    voronovskaja_s0_remark,
    weight_derivative_report,
)
from hybridop.services.moments import printed_second_moment
from hybridop.utils.function_suite import FUNCTION_SUITE, exp_neg, kink32, monomial, polynomial

SWEEP = [25, 50, 100, 200, 400]
LIMIT_TOL: float = 1e-9


class TestFitOrder:
    def test_exact_power(self) -> None:
        pairs = [(n, 3.0 * n ** -2.0) for n in (10, 20, 40, 80)]
        assert fit_order(pairs) == pytest.approx(-2.0, abs=1e-12)

    def test_too_few_pairs(self) -> None:
        with pytest.raises(InsufficientDataError):
            fit_order([(10, 0.1), (20, 0.05), (40, 0.025)])

    def test_noise_floor_drops_pairs(self) -> None:
        pairs = [(10, 0.1), (20, 0.05), (40, 0.025), (80, 0.0125), (160, 1e-15)]
        assert fit_order(pairs, noise_floor=1e-12) == pytest.approx(-1.0, abs=1e-12)
        with pytest.raises(InsufficientDataError):
            fit_order(pairs, noise_floor=0.02)


class TestVoronovskajaRHS:
    @pytest.mark.parametrize("x", [0.0, 0.7, 2.0])
    def test_variants_coincide_at_s1(self, x: float) -> None:
        rhs = VoronovskajaRHS(s=1, c=0.5)
        assert rhs.coefficient_first(x, "proof") == pytest.approx(rhs.coefficient_first(x, "printed"))

    @pytest.mark.parametrize("s", [0, 2, 3])
    def test_variants_coincide_at_origin(self, s: int) -> None:
        rhs = VoronovskajaRHS(s=s, c=0.5)
        assert rhs.coefficient_first(0.0, "proof") == rhs.coefficient_first(0.0, "printed") == 1.0 + s

    def test_variants_differ_elsewhere(self) -> None:
        rhs = VoronovskajaRHS(s=0, c=0.5)
        assert rhs.coefficient_first(1.0, "proof") == 1.0
        assert rhs.coefficient_first(1.0, "printed") == 1.5

    def test_unknown_variant(self) -> None:
        with pytest.raises(DomainError):
            VoronovskajaRHS(s=0, c=1.0).coefficient_first(1.0, "other")

    def test_value_for_square(self) -> None:
        assert VoronovskajaRHS(s=0, c=0.5).value(monomial(2), 1.0) == pytest.approx(4.5)


class TestQnReference:
    def test_origin(self) -> None:
        assert qn_reference(OperatorParams(n=1, c=1.0), 0, 0.0) == pytest.approx(math.sqrt(2.0))

    def test_example(self) -> None:
        assert qn_reference(OperatorParams(n=100, c=1.0), 1, 1.0) == pytest.approx(math.sqrt(314.0))

    @pytest.mark.parametrize("r", [0, 2, 5])
    def test_matches_printed_moment(self, r: int) -> None:
        params = OperatorParams(n=30, c=0.4)
        q = qn_reference(params, r, 1.3)
        assert (q / params.n) ** 2 == pytest.approx(printed_second_moment(params, r, 1.3), rel=1e-13)


class TestVoronovskaja:
    def test_identity_exposes_printed_coefficient(self, eval_cfg: EvalConfig) -> None:
        report = voronovskaja_experiment(monomial(1), 0, 1.0, 0.5, SWEEP, eval_cfg, workers=1)
        assert report.metadata["limit"] == pytest.approx(1.0, abs=LIMIT_TOL)
        assert report.verdict == Verdict.DISCREPANCY_LOGGED
        assert report.summary.startswith("supports proof-internal coefficient")
        assert report.metadata["supports_proof_internal"]
        assert not report.metadata["supports_printed"]

    def test_square(self, eval_cfg: EvalConfig) -> None:
        report = voronovskaja_experiment(monomial(2), 0, 1.0, 0.5, SWEEP, eval_cfg, workers=1)
        assert report.metadata["limit"] == pytest.approx(4.5, rel=1e-8)
        assert report.metadata["printed"] == pytest.approx(5.5)
        assert report.verdict == Verdict.DISCREPANCY_LOGGED

    def test_cube_first_derivative(self, eval_cfg: EvalConfig) -> None:
        report = voronovskaja_experiment(monomial(3), 1, 1.0, 0.5, SWEEP, eval_cfg, workers=1)
        assert report.metadata["limit"] == pytest.approx(22.5, rel=1e-8)
        assert report.verdict == Verdict.PASS
        assert report.summary.startswith("supports both coefficient variants")

    def test_constant(self, eval_cfg: EvalConfig) -> None:
        report = voronovskaja_experiment(polynomial([3.0]), 0, 1.0, 1.0, SWEEP, eval_cfg, workers=1)
        assert abs(report.metadata["limit"]) <= 1e-9
        assert report.verdict == Verdict.PASS

    def test_fitted_order_needs_six_points(self, eval_cfg: EvalConfig) -> None:
        report = voronovskaja_experiment(monomial(2), 0, 1.0, 0.5, SWEEP, eval_cfg, workers=1)
        assert report.fitted_order is None
        assert len(report.rows) == len(SWEEP)

    def test_rejects_origin(self) -> None:
        with pytest.raises(DomainError):
            voronovskaja_experiment(monomial(2), 0, 0.0, 0.5, SWEEP)

    def test_single_point_sweep(self) -> None:
        with pytest.raises(InsufficientDataError):
            voronovskaja_experiment(monomial(2), 0, 1.0, 0.5, [100])

    @pytest.mark.slow
    @pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("c", [0.5, 1.0])
    @pytest.mark.parametrize("s", [0, 1, 2])
    def test_exp_neg_limits(self, s: int, c: float, x: float, eval_cfg: EvalConfig) -> None:
        f = exp_neg()
        report = voronovskaja_experiment(f, s, x, c, None, eval_cfg)
        first, second = VoronovskajaRHS(s=s, c=c).terms(f, x, "proof")
        assert report.metadata["supports_proof_internal"]
        assert abs(report.metadata["limit"] - (first + second)) <= 0.01 * (abs(first) + abs(second))
        assert report.verdict != Verdict.FAIL

    def test_s0_remark(self, eval_cfg: EvalConfig) -> None:
        report = voronovskaja_s0_remark(monomial(2), 1.0, 0.5, SWEEP, eval_cfg, workers=1)
        assert report.name == "voronovskaja-s0-remark"
        assert report.metadata["limit"] == pytest.approx(4.5, rel=1e-8)
        assert report.metadata["limit_at_c1"] == pytest.approx(5.0, rel=1e-8)
        assert report.metadata["baskakov_szasz_reduction"] == pytest.approx(7.0)
        path = report.metadata["c_path"]
        assert [entry["c"] for entry in path] == [0.5, 0.9, 0.99, 0.999, 1.0]
        assert path[-1]["proof_internal"] == pytest.approx(5.0)


class TestSimultaneousConvergence:
    def test_square(self, eval_cfg: EvalConfig) -> None:
        report = simultaneous_convergence_experiment(monomial(2), 0, [0.5, 1.0, 2.0], SWEEP, 0.5, eval_cfg, 1)
        assert report.verdict == Verdict.PASS
        assert report.fitted_order == pytest.approx(-1.0, abs=0.1)
        assert len(report.rows) == 3 * len(SWEEP)

    def test_square_first_derivative(self, eval_cfg: EvalConfig) -> None:
        report = simultaneous_convergence_experiment(monomial(2), 1, [0.5, 1.0], SWEEP, 1.0, eval_cfg, 1)
        assert report.verdict == Verdict.PASS

    def test_constant_below_noise_floor(self, eval_cfg: EvalConfig) -> None:
        report = simultaneous_convergence_experiment(polynomial([2.0]), 0, [1.0], SWEEP, 0.5, eval_cfg, 1)
        assert report.verdict == Verdict.PASS
        assert report.fitted_order is None

    def test_exp_neg(self, eval_cfg: EvalConfig) -> None:
        report = simultaneous_convergence_experiment(exp_neg(), 0, [2.0, 3.0], [50, 100, 200, 400, 800], 0.5,
                                                     eval_cfg, 1)
        assert report.metadata["monotone"]
        assert report.fitted_order < -0.7

    def test_exp_neg_default_sweep(self, eval_cfg: EvalConfig) -> None:
        report = simultaneous_convergence_experiment(exp_neg(), 0, [1.0], get_settings().default_n_sweep, 1.0,
                                                     eval_cfg)
        assert report.verdict == Verdict.PASS
        assert report.fitted_order == pytest.approx(-1.0, abs=0.1)


class TestPointwiseBound:
    def test_identity_derivative(self, eval_cfg: EvalConfig) -> None:
        report = pointwise_bound_check(monomial(1), 1, [10, 40], [0.5, 1.0], 1.0, eval_cfg, 1)
        assert report.verdict == Verdict.PASS

    def test_square(self, eval_cfg: EvalConfig) -> None:
        report = pointwise_bound_check(monomial(2), 0, [10, 40], [0.5, 1.0], 0.5, eval_cfg, 1)
        assert report.verdict == Verdict.PASS
        assert report.metadata["violations_numeric_q"] == 0
        assert len(report.metadata["rhs_printed_q"]) == 4

    def test_lipschitz_variant(self, eval_cfg: EvalConfig) -> None:
        report = pointwise_bound_check(monomial(2), 0, [20], [1.0], 0.5, eval_cfg, 1, lipschitz_alpha=1.0)
        assert report.metadata["lipschitz_alpha"] == 1.0
        assert len(report.metadata["rhs_lipschitz"]) == 1

    @pytest.mark.slow
    @pytest.mark.parametrize("r", [0, 1])
    @pytest.mark.parametrize("factory", [exp_neg, kink32])
    @pytest.mark.parametrize("c", [0.5, 1.0])
    def test_acceptance_grid(self, factory, r: int, c: float, eval_cfg: EvalConfig) -> None:
        n_values = [25, 50, 100, 200, 400]
        x_values = [0.25 * i for i in range(1, 10)]
        report = pointwise_bound_check(factory(), r, n_values, x_values, c, eval_cfg)
        assert report.verdict == Verdict.PASS
        assert report.metadata["violations_numeric_q"] == 0
        assert len(report.rows) == 45


class TestGlobalRate:
    def test_affine(self, intervals: IntervalPair, eval_cfg: EvalConfig) -> None:
        report = global_rate_experiment(polynomial([0.5, 2.0]), 0, intervals, 0.5, [10, 20, 40, 80], eval_cfg, 1,
                                        grid_points=9)
        assert report.verdict == Verdict.PASS
        assert report.metadata["spread"] == pytest.approx(1.0, rel=1e-6)
        assert report.fitted_order == pytest.approx(-1.0, abs=1e-6)

    def test_affine_derivative_below_noise_floor(self, intervals: IntervalPair, eval_cfg: EvalConfig) -> None:
        report = global_rate_experiment(polynomial([0.5, 2.0]), 1, intervals, 0.5, [10, 20, 40, 80], eval_cfg, 1,
                                        grid_points=9)
        assert report.verdict == Verdict.PASS
        assert report.metadata["spread"] == 1.0

    @pytest.mark.slow
    def test_kink(self, intervals: IntervalPair, eval_cfg: EvalConfig) -> None:
        report = global_rate_experiment(kink32(), 0, intervals, 1.0, get_settings().default_n_sweep, eval_cfg)
        assert report.verdict == Verdict.PASS
        assert report.fitted_order <= -0.7
        assert report.metadata["spread"] <= 3.0
        assert report.metadata["grid_points"] == 201


class TestSteklovProperties:
    def test_square(self, intervals: IntervalPair) -> None:
        report = steklov_property_report(monomial(2), 2, intervals, [0.2, 0.1, 0.05, 0.025], grid_points=33)
        assert report.verdict == Verdict.DISCREPANCY_LOGGED
        constants = report.metadata["empirical_constants"]
        assert set(constants) == {"b1", "b2", "c", "d", "e"}
        assert constants["c"] == pytest.approx([1.0 / 6.0] * 4, rel=1e-9)
        assert constants["b2"] == pytest.approx([1.0] * 4, rel=1e-9)
        assert report.metadata["printed_b_growth"]["b1"] > 1.5

    def test_affine_reproduced(self, intervals: IntervalPair) -> None:
        report = steklov_property_report(polynomial([0.5, 2.0]), 1, intervals, [0.2, 0.1, 0.05], grid_points=33)
        assert report.verdict == Verdict.PASS
        assert max(report.metadata["empirical_constants"]["c"]) <= 1e-12
        assert report.metadata["empirical_constants"]["b1"] == pytest.approx([1.0] * 3, rel=1e-9)

    @pytest.mark.parametrize("name", sorted(FUNCTION_SUITE))
    def test_bundled_suite(self, name: str, intervals: IntervalPair) -> None:
        report = steklov_property_report(FUNCTION_SUITE[name](), 2, intervals, [0.2, 0.1, 0.05, 0.025])
        assert report.verdict in (Verdict.PASS, Verdict.DISCREPANCY_LOGGED)
        assert max(report.metadata["growth"].values()) <= get_settings().growth_slack
        assert max(report.metadata["empirical_constants"]["d"]) <= 2.0

    def test_affine_second_order_constants_vanish(self, intervals: IntervalPair) -> None:
        report = steklov_property_report(polynomial([0.5, 2.0]), 2, intervals, [0.2, 0.1, 0.05], grid_points=33)
        assert report.metadata["empirical_constants"]["c"] == [0.0] * 3
        assert report.metadata["empirical_constants"]["b2"] == [0.0] * 3
        assert report.verdict != Verdict.FAIL

    def test_h_grid_must_decrease(self, intervals: IntervalPair) -> None:
        with pytest.raises(DomainError):
            steklov_property_report(monomial(2), 2, intervals, [0.05, 0.1])


class TestTailDecay:
    @pytest.mark.parametrize("gamma", [0.0, 1.0])
    def test_decay(self, gamma: float, eval_cfg: EvalConfig) -> None:
        report = tail_decay_experiment(1.0, 0.5, gamma, 0.5, SWEEP, eval_cfg, 1)
        assert report.verdict == Verdict.PASS
        assert report.metadata["decreasing"]
        assert report.fitted_order < -3.0


class TestDiscrepancyReports:
    def test_transfer_identity_at_c_one(self, eval_cfg: EvalConfig) -> None:
        report = transfer_identity_report(exp_neg(), 1, [0.5, 1.0, 2.0], OperatorParams(n=10, c=1.0), eval_cfg, 1)
        assert report.verdict == Verdict.PASS

    def test_transfer_identity_below_c_one(self, eval_cfg: EvalConfig) -> None:
        report = transfer_identity_report(exp_neg(), 1, [0.5, 1.0, 2.0], OperatorParams(n=10, c=0.5), eval_cfg, 1)
        assert report.verdict == Verdict.DISCREPANCY_LOGGED
        assert max(row.rel_err for row in report.rows) <= 1e-4

    def test_weight_derivative_at_c_one(self) -> None:
        report = weight_derivative_report(OperatorParams(n=10, c=1.0), [0.5, 1.0])
        assert report.verdict == Verdict.PASS
        assert report.metadata["printed_gap"] == 0.0
        worst = max(row.abs_err for row in report.rows)
        assert worst <= 1e-6 * max(abs(row.reference) for row in report.rows)

    def test_weight_derivative_below_c_one(self) -> None:
        report = weight_derivative_report(OperatorParams(n=10, c=0.5), [0.5, 1.0])
        assert report.verdict == Verdict.DISCREPANCY_LOGGED
        assert np.isfinite(report.metadata["printed_gap"])
