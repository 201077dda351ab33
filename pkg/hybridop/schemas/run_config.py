"""
Run configuration for the CLI.

A RunConfig is assembled from an optional key=value file and the command-line
flags (flags win). Its JSON dump is echoed into every report and re-parses with
``RunConfig.model_validate``.
"""

from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from hybridop.core.config import get_settings
from hybridop.core.errors import ConfigError, HybridOpError
from hybridop.schemas.functions import FunctionSpec
from hybridop.schemas.params import EvalConfig, IntervalPair, OperatorParams, QuadratureConfig
from hybridop.utils.function_suite import resolve_function


class Command(str, Enum):
    """CLI subcommands."""
    EVAL = "eval"
    MOMENTS = "moments"
    VORONOVSKAJA = "voronovskaja"
    CONVERGE = "converge"
    BOUND_CHECK = "bound-check"
    GLOBAL_RATE = "global-rate"
    STEKLOV = "steklov"
    TAILS = "tails"


class ReportFormat(str, Enum):
    """Report file formats."""
    CSV = "csv"
    JSON = "json"


# Commands that do not evaluate a user function
_FUNCTIONLESS = {Command.MOMENTS, Command.TAILS}


def _parse_float_list(value: Any) -> Any:
    if isinstance(value, str):
        return [float(v.strip()) for v in value.split(",") if v.strip()]
    return value


class RunConfig(BaseModel):
    """Everything one CLI run needs; identical configs give identical reports."""
    command: Command
    n: float = Field(default=10.0, ge=1.0, description="Operator index for single-n commands")
    c: float = Field(default=1.0, gt=0.0, le=1.0, description="Baskakov parameter")
    r: int = Field(default=0, ge=0, le=6, description="Derivative order (eval, bound-check, global-rate)")
    s: int = Field(default=0, ge=0, le=6, description="Derivative order (voronovskaja, converge) or Steklov order")
    fn: Optional[str] = Field(default=None, description="Bundled function name, e.g. 't2', 'exp_neg', 'kink32'")
    coeffs: Optional[List[float]] = Field(default=None, description="Inline polynomial coefficients a0, a1, ...")
    x: float = Field(default=1.0, ge=0.0)
    x_min: Optional[float] = Field(default=None, ge=0.0)
    x_max: Optional[float] = Field(default=None, ge=0.0)
    x_count: int = Field(default=9, ge=1)
    n_sweep: List[float] = Field(default_factory=lambda: list(get_settings().default_n_sweep), min_length=1)
    h_grid: List[float] = Field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025], min_length=1)
    a: float = 0.2
    a1: float = 0.6
    b1: float = 1.4
    b: float = 1.8
    delta: float = Field(default=0.5, gt=0.0)
    gamma: float = Field(default=0.0, ge=0.0)
    alpha: Optional[float] = Field(default=None, gt=0.0, le=1.0, description="Lipschitz exponent for bound-check")
    central: bool = False
    max_order: int = Field(default=4, ge=0, le=12)
    output: Optional[str] = None
    format: ReportFormat = ReportFormat.CSV
    truncation_tolerance: Optional[float] = Field(default=None, gt=0.0, le=1e-3)
    rel_tolerance: Optional[float] = Field(default=None, gt=0.0)
    base_order: Optional[int] = Field(default=None, ge=8, le=256)
    seed: int = 0
    samples: int = Field(default=0, ge=0)
    threads: Optional[int] = Field(default=None, ge=0)

    @field_validator("coeffs", "n_sweep", "h_grid", mode="before")
    @classmethod
    def _split_lists(cls, value: Any) -> Any:
        return _parse_float_list(value)

    @model_validator(mode="after")
    def _check_grids(self) -> "RunConfig":
        if (self.x_min is None) != (self.x_max is None):
            raise ValueError("x_min and x_max must be given together")
        if self.x_min is not None and self.x_max < self.x_min:
            raise ValueError("x_max must be >= x_min")
        if any(n < 1 for n in self.n_sweep):
            raise ValueError("n_sweep values must be >= 1")
        if self.command not in _FUNCTIONLESS and not self.fn and not self.coeffs:
            raise ValueError(f"command '{self.command.value}' needs --fn or --coeffs")
        return self

    # ============================================
    # Derived objects
    # ============================================

    def x_grid(self) -> List[float]:
        """Uniform grid on [x_min, x_max], or the single point x."""
        if self.x_min is None:
            return [self.x]
        return [float(v) for v in np.linspace(self.x_min, self.x_max, self.x_count)]

    def sample_points(self) -> List[float]:
        """``samples`` extra points drawn uniformly from the x range with the configured seed."""
        if self.samples == 0:
            return []
        lo = self.x_min if self.x_min is not None else 0.0
        hi = self.x_max if self.x_max is not None else max(self.x, 1.0)
        rng = np.random.default_rng(self.seed)
        return [float(v) for v in np.sort(rng.uniform(lo, hi, self.samples))]

    def function(self) -> FunctionSpec:
        try:
            return resolve_function(self.fn, self.coeffs)
        except HybridOpError as exc:
            raise ConfigError(exc.message, field="fn", **exc.context) from exc

    def operator_params(self) -> OperatorParams:
        return OperatorParams(n=self.n, c=self.c)

    def intervals(self) -> IntervalPair:
        try:
            return IntervalPair(a=self.a, a1=self.a1, b1=self.b1, b=self.b)
        except ValidationError as exc:
            raise ConfigError("invalid interval pair", field="a, a1, b1, b",
                              detail=exc.errors()[0]["msg"]) from exc

    def eval_config(self) -> EvalConfig:
        """Settings-derived numeric configuration with this run's overrides applied."""
        base = EvalConfig.from_settings()
        quad_updates: Dict[str, Any] = {}
        if self.rel_tolerance is not None:
            quad_updates["rel_tolerance"] = self.rel_tolerance
        if self.base_order is not None:
            quad_updates["base_order"] = self.base_order
        updates: Dict[str, Any] = {}
        if quad_updates:
            updates["quadrature"] = QuadratureConfig(**{**base.quadrature.model_dump(), **quad_updates})
        if self.truncation_tolerance is not None:
            updates["truncation_tolerance"] = self.truncation_tolerance
        return base.model_copy(update=updates) if updates else base

    def echo(self) -> Dict[str, Any]:
        """JSON-safe dump for report metadata."""
        return self.model_dump(mode="json")


# ============================================
# key=value config files
# ============================================

_KEY_ALIASES = {"max": "max_order", "function": "fn"}


def _normalize_key(key: str) -> str:
    key = key.strip().lower().replace("-", "_")
    return _KEY_ALIASES.get(key, key)


def load_config_file(path: Path) -> Dict[str, str]:
    """
    Parse a key=value file. Blank lines and lines starting with '#' are skipped;
    keys may use dashes or underscores.

    Raises:
        ConfigError: unreadable file, malformed line or unknown key (with line number)
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("cannot read config file", path=str(path), reason=exc.strerror) from exc
    values: Dict[str, str] = {}
    known = set(RunConfig.model_fields)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError("expected key=value", path=str(path), line=lineno, text=line)
        key, value = line.split("=", 1)
        key = _normalize_key(key)
        if key not in known:
            raise ConfigError("unknown config key", path=str(path), line=lineno, key=key)
        values[key] = value.strip()
    return values


def build_run_config(command: str, flags: Dict[str, Any], config_path: Optional[Path] = None) -> RunConfig:
    """Merge file values with flags (flags win; None means 'not given') and validate."""
    merged: Dict[str, Any] = load_config_file(config_path) if config_path else {}
    merged.update({key: value for key, value in flags.items() if value is not None})
    merged["command"] = command
    try:
        return RunConfig.model_validate(merged)
    except ValidationError as exc:
        first = exc.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or "config"
        raise ConfigError("invalid run configuration", field=field, detail=first["msg"],
                          errors=len(exc.errors())) from exc
