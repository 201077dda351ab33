"""Tests for settings, run configuration, config files and the error hierarchy."""

from pathlib import Path

import pytest
from pydantic import ValidationError

from hybridop.core.config import get_settings
from hybridop.core.errors import ConfigError, DomainError, HybridOpError
from hybridop.schemas.params import EvalConfig
from hybridop.schemas.run_config import Command, RunConfig, build_run_config, load_config_file
from hybridop.tasks.sweeps import resolve_workers, run_grid


class TestSettings:
    def test_defaults(self) -> None:
        settings = get_settings()
        assert settings.truncation_tolerance == 1e-14
        assert settings.default_n_sweep == [25.0, 50.0, 100.0, 200.0, 400.0, 800.0, 1600.0]

    def test_environment_override(self, monkeypatch) -> None:
        monkeypatch.setenv("HYBRIDOP_NOISE_FLOOR", "1e-6")
        monkeypatch.setenv("HYBRIDOP_DEFAULT_N_SWEEP_STR", "10, 20,40")
        get_settings.cache_clear()
        settings = get_settings()
        assert settings.noise_floor == 1e-6
        assert settings.default_n_sweep == [10.0, 20.0, 40.0]

    def test_eval_config_follows_settings(self, monkeypatch) -> None:
        monkeypatch.setenv("HYBRIDOP_QUADRATURE_BASE_ORDER", "32")
        get_settings.cache_clear()
        assert EvalConfig.from_settings().quadrature.base_order == 32


class TestRunConfig:
    def test_operator_params_hold_n_and_c(self) -> None:
        config = RunConfig(command="eval", fn="t2", n=20, c=0.5, r=2)
        assert config.operator_params().model_dump() == {"n": 20.0, "c": 0.5}
        assert config.r == 2

    def test_minimal(self) -> None:
        config = RunConfig(command="eval", fn="t2")
        assert config.command == Command.EVAL
        assert (config.n, config.c, config.x) == (10.0, 1.0, 1.0)
        assert config.x_grid() == [1.0]
        assert config.sample_points() == []

    def test_functionless_commands(self) -> None:
        assert RunConfig(command="moments").fn is None
        assert RunConfig(command="tails").fn is None

    def test_function_required(self) -> None:
        with pytest.raises(ValidationError):
            RunConfig(command="voronovskaja")

    def test_comma_lists(self) -> None:
        config = RunConfig(command="converge", fn="t1", n_sweep="25, 50,100", coeffs="1,0,2")
        assert config.n_sweep == [25.0, 50.0, 100.0]
        assert config.coeffs == [1.0, 0.0, 2.0]

    @pytest.mark.parametrize("updates", [
        {"n_sweep": "0.5,10"},
        {"x_min": 0.0},
        {"x_min": 2.0, "x_max": 1.0},
        {"c": 1.5},
        {"r": 7},
    ])
    def test_invalid(self, updates) -> None:
        with pytest.raises(ValidationError):
            RunConfig(command="eval", fn="t1", **updates)

    def test_x_grid(self) -> None:
        config = RunConfig(command="eval", fn="t1", x_min=0.0, x_max=2.0, x_count=5)
        assert config.x_grid() == pytest.approx([0.0, 0.5, 1.0, 1.5, 2.0])

    def test_sample_points_are_seeded(self) -> None:
        first = RunConfig(command="eval", fn="t1", x_min=0.0, x_max=2.0, samples=6, seed=7).sample_points()
        second = RunConfig(command="eval", fn="t1", x_min=0.0, x_max=2.0, samples=6, seed=7).sample_points()
        assert first == second
        assert len(first) == 6
        assert all(0.0 <= v <= 2.0 for v in first)
        assert first == sorted(first)

    def test_unknown_function(self) -> None:
        with pytest.raises(ConfigError) as info:
            RunConfig(command="eval", fn="nope").function()
        assert info.value.context["field"] == "fn"

    def test_coefficients_win_over_name(self) -> None:
        f = RunConfig(command="eval", fn="t1", coeffs=[1.0, 2.0]).function()
        assert f.coefficients == (1.0, 2.0)

    def test_bad_intervals(self) -> None:
        with pytest.raises(ConfigError):
            RunConfig(command="global-rate", fn="t1", a1=2.0).intervals()

    def test_eval_config_overrides(self) -> None:
        config = RunConfig(command="eval", fn="t1", rel_tolerance=1e-8, base_order=32, truncation_tolerance=1e-12)
        cfg = config.eval_config()
        assert cfg.quadrature.rel_tolerance == 1e-8
        assert cfg.quadrature.base_order == 32
        assert cfg.truncation_tolerance == 1e-12
        assert cfg.quadrature.max_refinements == get_settings().quadrature_max_refinements

    def test_eval_config_without_overrides(self) -> None:
        assert RunConfig(command="eval", fn="t1").eval_config() == EvalConfig.from_settings()

    def test_echo_round_trip(self) -> None:
        config = RunConfig(command="steklov", fn="kink32", s=2, h_grid="0.1,0.05")
        assert RunConfig.model_validate(config.echo()) == config


class TestConfigFile:
    def test_parse(self, tmp_path: Path) -> None:
        path = tmp_path / "run.cfg"
        path.write_text("# header\n\nn = 20\nmax=6\nFunction = t3\nn-sweep = 25,50\n")
        assert load_config_file(path) == {"n": "20", "max_order": "6", "fn": "t3", "n_sweep": "25,50"}

    def test_unknown_key(self, tmp_path: Path) -> None:
        path = tmp_path / "run.cfg"
        path.write_text("n = 20\nwidth = 3\n")
        with pytest.raises(ConfigError) as info:
            load_config_file(path)
        assert info.value.context["line"] == 2
        assert info.value.context["key"] == "width"

    def test_malformed_line(self, tmp_path: Path) -> None:
        path = tmp_path / "run.cfg"
        path.write_text("n 20\n")
        with pytest.raises(ConfigError, match="expected key=value"):
            load_config_file(path)

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigError, match="cannot read config file"):
            load_config_file(tmp_path / "absent.cfg")

    def test_flags_override_file(self, tmp_path: Path) -> None:
        path = tmp_path / "run.cfg"
        path.write_text("n = 20\nc = 0.5\nfn = t2\n")
        config = build_run_config("eval", {"n": 30.0, "c": None, "x": None}, path)
        assert (config.n, config.c, config.fn) == (30.0, 0.5, "t2")

    def test_validation_becomes_config_error(self) -> None:
        with pytest.raises(ConfigError) as info:
            build_run_config("eval", {"fn": "t1", "c": 2.0})
        assert info.value.context["field"] == "c"


class TestErrors:
    def test_context_rendering(self) -> None:
        err = DomainError("x must be nonnegative", x=-1.0)
        assert str(err) == "x must be nonnegative (x=-1.0)"
        assert isinstance(err, ValueError)
        assert isinstance(err, HybridOpError)

    def test_with_context_keeps_existing_keys(self) -> None:
        err = DomainError("bad", n=5).with_context(n=10, k=3)
        assert err.context == {"n": 5, "k": 3}
        assert str(err) == "bad (n=5, k=3)"

    def test_plain_message(self) -> None:
        assert str(HybridOpError("plain")) == "plain"


class TestSweeps:
    def test_resolve_workers(self, monkeypatch) -> None:
        assert resolve_workers(3) == 3
        assert resolve_workers(0) >= 1
        monkeypatch.setenv("HYBRIDOP_WORKER_THREADS", "2")
        get_settings.cache_clear()
        assert resolve_workers() == 2

    @pytest.mark.parametrize("workers", [1, 4])
    def test_order_preserved(self, workers: int) -> None:
        points = list(range(20))
        assert run_grid(lambda p: p * p, points, workers) == [p * p for p in points]
