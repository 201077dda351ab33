"""
hybridop command line.

Subcommands evaluate the operator (`eval`), tabulate moments (`moments`) and run
the experiment harness (`voronovskaja`, `converge`, `bound-check`, `global-rate`,
`steklov`, `tails`). Exit status: 0 pass or discrepancy-logged, 2 verdict fail,
1 execution error.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

from pydantic import ValidationError

from hybridop import __version__
from hybridop.commands.evaluate import run_eval, run_moments
from hybridop.commands.experiments import (
    run_bound_check,
    run_converge,
    run_global_rate,
    run_steklov,
    run_tails,
    run_voronovskaja,
)
from hybridop.core.config import get_settings
from hybridop.core.errors import HybridOpError
from hybridop.schemas.report import ExperimentReport
from hybridop.schemas.run_config import Command, ReportFormat, RunConfig, build_run_config
from hybridop.utils.reporting import write_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAIL = 2

HANDLERS: Dict[Command, Callable[[RunConfig], ExperimentReport]] = {
    Command.EVAL: run_eval,
    Command.MOMENTS: run_moments,
    Command.VORONOVSKAJA: run_voronovskaja,
    Command.CONVERGE: run_converge,
    Command.BOUND_CHECK: run_bound_check,
    Command.GLOBAL_RATE: run_global_rate,
    Command.STEKLOV: run_steklov,
    Command.TAILS: run_tails,
}

COMMAND_HELP = {
    Command.EVAL: "evaluate d^r/dx^r L_{n,c} f at x",
    Command.MOMENTS: "raw or central moment tables",
    Command.VORONOVSKAJA: "Voronovskaja limit with both first-order coefficients",
    Command.CONVERGE: "simultaneous convergence of normalized derivatives",
    Command.BOUND_CHECK: "pointwise bound 2 omega(f^(r), q/n)",
    Command.GLOBAL_RATE: "sup-norm rate on an inner interval",
    Command.STEKLOV: "Steklov mean properties over an h grid",
    Command.TAILS: "tail mass decay along an n sweep",
}

# Every flag defaults to None so that config-file values survive unless overridden.
_FLAG_FIELDS = (
    "n", "c", "r", "s", "fn", "coeffs", "x", "x_min", "x_max", "x_count", "n_sweep", "h_grid",
    "a", "a1", "b1", "b", "delta", "gamma", "alpha", "central", "max_order", "output", "format",
    "truncation_tolerance", "rel_tolerance", "base_order", "seed", "samples", "threads",
)


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    op = common.add_argument_group("operator")
    op.add_argument("--n", type=float, default=None, help="operator index (default 10)")
    op.add_argument("--c", type=float, default=None, help="Baskakov parameter in (0, 1] (default 1)")
    op.add_argument("--r", type=int, default=None, help="derivative order for eval/bound-check/global-rate")
    op.add_argument("--s", type=int, default=None, help="derivative order for voronovskaja/converge, Steklov order")

    fn = common.add_argument_group("function")
    fn.add_argument("--fn", type=str, default=None, help="bundled function: t0..t6, exp_neg, exp_neg_sin, kink32, inv1p, abs1")
    fn.add_argument("--coeffs", type=str, default=None, help="inline polynomial a0,a1,...")

    grid = common.add_argument_group("grids")
    grid.add_argument("--x", type=float, default=None, help="evaluation point (default 1)")
    grid.add_argument("--x-min", dest="x_min", type=float, default=None)
    grid.add_argument("--x-max", dest="x_max", type=float, default=None)
    grid.add_argument("--x-count", dest="x_count", type=int, default=None)
    grid.add_argument("--n-sweep", dest="n_sweep", type=str, default=None, help="comma-separated n values")
    grid.add_argument("--h-grid", dest="h_grid", type=str, default=None, help="comma-separated, decreasing h values")
    grid.add_argument("--a", type=float, default=None)
    grid.add_argument("--a1", type=float, default=None)
    grid.add_argument("--b1", type=float, default=None)
    grid.add_argument("--b", type=float, default=None)
    grid.add_argument("--delta", type=float, default=None, help="tail distance from x")
    grid.add_argument("--gamma", type=float, default=None, help="exponential growth rate of the tail integrand")
    grid.add_argument("--alpha", type=float, default=None, help="Lipschitz exponent tabulated by bound-check")
    grid.add_argument("--central", action="store_true", default=None, help="central instead of raw moments")
    grid.add_argument("--max", dest="max_order", type=int, default=None, help="highest moment order")
    grid.add_argument("--seed", type=int, default=None)
    grid.add_argument("--samples", type=int, default=None, help="random extra x points for eval/moments")

    out = common.add_argument_group("output and numerics")
    out.add_argument("--output", "-o", type=str, default=None, help="report file")
    out.add_argument("--format", type=str, choices=[f.value for f in ReportFormat], default=None)
    out.add_argument("--config", type=Path, default=None, help="key=value config file; flags win")
    out.add_argument("--truncation-tolerance", dest="truncation_tolerance", type=float, default=None)
    out.add_argument("--rel-tolerance", dest="rel_tolerance", type=float, default=None)
    out.add_argument("--base-order", dest="base_order", type=int, default=None)
    out.add_argument("--threads", type=int, default=None, help="worker threads (0 = logical cores)")
    out.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    return common


def create_parser() -> argparse.ArgumentParser:
    """Build the subcommand parser."""
    parser = argparse.ArgumentParser(prog="hybridop", description="Hybrid Baskakov-Szász operator toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_flags()
    for command in Command:
        sub.add_parser(command.value, parents=[common], help=COMMAND_HELP[command])
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    flags = {field: getattr(args, field) for field in _FLAG_FIELDS}
    return build_run_config(args.command, flags, args.config)


def run(config: RunConfig) -> int:
    """Execute one configured command: report file, one-line summary, exit status."""
    report = HANDLERS[config.command](config)
    metadata = dict(report.metadata)
    metadata["run_config"] = config.echo()
    report = report.model_copy(update={"metadata": metadata})
    write_report(report, config.output, config.format)
    print(f"{report.name}: {report.verdict.value}: {report.summary}")
    return EXIT_OK if report.passed else EXIT_FAIL


def main(argv: Optional[List[str]] = None) -> int:
    args = create_parser().parse_args(argv)
    settings = get_settings()
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else settings.log_level.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        config = config_from_args(args)
        logger.debug("🚀 %s %s", config.command.value, config.echo())
        return run(config)
    except (HybridOpError, ValidationError) as exc:
        logger.error("❌ %s failed: %s", args.command, exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
