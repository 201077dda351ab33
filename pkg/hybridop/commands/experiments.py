"""Handlers for the experiment subcommands."""

from hybridop.core.errors import ConfigError
from hybridop.schemas.report import ExperimentReport
from hybridop.schemas.run_config import RunConfig
from hybridop.services.analysis import (
    global_rate_experiment,
    pointwise_bound_check,
    simultaneous_convergence_experiment,
    steklov_property_report,
    tail_decay_experiment,
    voronovskaja_experiment,
    voronovskaja_s0_remark,
)


def run_voronovskaja(config: RunConfig) -> ExperimentReport:
    f = config.function()
    cfg = config.eval_config()
    if config.s == 0:
        return voronovskaja_s0_remark(f, config.x, config.c, config.n_sweep, cfg, config.threads)
    return voronovskaja_experiment(f, config.s, config.x, config.c, config.n_sweep, cfg, config.threads)


def run_converge(config: RunConfig) -> ExperimentReport:
    return simultaneous_convergence_experiment(
        config.function(), config.s, config.x_grid(), config.n_sweep, config.c,
        config.eval_config(), config.threads,
    )


def run_bound_check(config: RunConfig) -> ExperimentReport:
    return pointwise_bound_check(
        config.function(), config.r, config.n_sweep, config.x_grid(), config.c,
        config.eval_config(), config.threads, lipschitz_alpha=config.alpha,
    )


def run_global_rate(config: RunConfig) -> ExperimentReport:
    return global_rate_experiment(
        config.function(), config.r, config.intervals(), config.c, config.n_sweep,
        config.eval_config(), config.threads,
    )


def run_steklov(config: RunConfig) -> ExperimentReport:
    if not 1 <= config.s <= 3:
        raise ConfigError("steklov needs --s in [1, 3]", field="s", value=config.s)
    return steklov_property_report(config.function(), config.s, config.intervals(), config.h_grid)


def run_tails(config: RunConfig) -> ExperimentReport:
    return tail_decay_experiment(
        config.x, config.delta, config.gamma, config.c, config.n_sweep,
        config.eval_config(), config.threads,
    )
