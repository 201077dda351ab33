import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from hybridop.core.config import Settings, get_settings


class OperatorParams(BaseModel):
    """Parameters (n, c) of L_{n,c}."""
    model_config = ConfigDict(frozen=True)

    n: float = Field(..., ge=1.0, description="Operator index (real n >= 1 accepted)")
    c: float = Field(..., gt=0.0, le=1.0, description="Baskakov parameter in (0, 1]")

    @model_validator(mode="after")
    def _check_finite(self) -> "OperatorParams":
        if not math.isfinite(self.n) or not math.isfinite(self.n / self.c):
            raise ValueError("n and n/c must be finite")
        return self

    @property
    def size(self) -> float:
        """Negative-binomial size parameter n/c."""
        return self.n / self.c

    def shifted(self, steps: int) -> "OperatorParams":
        """Parameters with n replaced by n + steps*c (the basis shift of the derivative identity)."""
        return self.model_copy(update={"n": self.n + steps * self.c})


class QuadratureConfig(BaseModel):
    """Adaptive composite Gauss-Legendre settings for Erlang integrals."""
    model_config = ConfigDict(frozen=True)

    base_order: int = Field(default=64, ge=8, le=256)
    max_refinements: int = Field(default=12, ge=0)
    rel_tolerance: float = Field(default=1e-10, gt=0.0)
    abs_tolerance: float = Field(default=1e-14, gt=0.0)
    window_sigmas: float = Field(default=12.0, gt=0.0, description="Half-width of the Gamma window in standard deviations")
    window_margin: float = Field(default=40.0, ge=0.0, description="Extra absolute half-width in u = nt")
    panel_sigmas: float = Field(default=6.0, gt=0.0, description="Initial panel width in local standard deviations")
    chunk_size: int = Field(default=256, ge=1, description="Kernel indices processed per vectorized block")


class EvalConfig(BaseModel):
    """Numeric configuration shared by every operator evaluation."""
    model_config = ConfigDict(frozen=True)

    truncation_tolerance: float = Field(default=1e-14, gt=0.0, le=1e-3)
    truncation_cap: int = Field(default=10_000_000, ge=1)
    quadrature: QuadratureConfig = Field(default_factory=QuadratureConfig)

    @classmethod
    def from_settings(cls, settings: Optional[Settings] = None) -> "EvalConfig":
        settings = settings or get_settings()
        return cls(
            truncation_tolerance=settings.truncation_tolerance,
            truncation_cap=settings.truncation_cap,
            quadrature=QuadratureConfig(
                base_order=settings.quadrature_base_order,
                max_refinements=settings.quadrature_max_refinements,
                rel_tolerance=settings.quadrature_rel_tolerance,
                abs_tolerance=settings.quadrature_abs_tolerance,
            ),
        )


def default_eval_config() -> EvalConfig:
    return EvalConfig.from_settings()


class TruncationWindow(BaseModel):
    """Index range [k_lo, k_hi] holding all but ``tolerance`` of the Baskakov mass."""
    model_config = ConfigDict(frozen=True)

    k_lo: int = Field(..., ge=0)
    k_hi: int = Field(..., ge=0)
    captured_mass: float = Field(..., gt=0.0, le=1.0)
    tolerance: float = Field(..., gt=0.0)
    saturated: bool = Field(default=False, description="Mass reached 1 - tolerance only up to rounding")

    @model_validator(mode="after")
    def _check_order(self) -> "TruncationWindow":
        if self.k_hi < self.k_lo:
            raise ValueError("k_hi must be >= k_lo")
        return self

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.k_lo, self.k_hi + 1, dtype=np.int64)

    @property
    def size(self) -> int:
        return self.k_hi - self.k_lo + 1


class OperatorValue(BaseModel):
    """Operator value with its error budget."""
    model_config = ConfigDict(frozen=True)

    value: float
    truncation_mass_dropped: float = Field(..., ge=0.0)
    quadrature_error: float = Field(..., ge=0.0)

    @property
    def error(self) -> float:
        return self.truncation_mass_dropped + self.quadrature_error

    def scaled(self, factor: float) -> "OperatorValue":
        return OperatorValue(
            value=self.value * factor,
            truncation_mass_dropped=self.truncation_mass_dropped,
            quadrature_error=self.quadrature_error * abs(factor),
        )


class LambdaNorm(BaseModel):
    """Normalizer λ_n(c, s) = ∏_{i<s} (n + i c) / n."""
    model_config = ConfigDict(frozen=True)

    s: int = Field(..., ge=0)
    value: float = Field(..., gt=0.0)


class SecondMomentComparison(BaseModel):
    """Second central moment of L_{n,c,r}: numeric value against two closed forms."""
    model_config = ConfigDict(frozen=True)

    r: int = Field(..., ge=0)
    x: float = Field(..., ge=0.0)
    numeric: float
    printed: float = Field(..., description="Closed form with r(x(cx+4)+3) + r^2(x+1)^2")
    exact: float = Field(..., description="Closed form with r(cx+1)(cx+3) + r^2(cx+1)^2")
    discrepancy: float = Field(..., ge=0.0, description="Relative gap between numeric and printed")


class IntervalPair(BaseModel):
    """Outer interval [a, b] and inner interval [a1, b1] with a < a1 < b1 < b."""
    model_config = ConfigDict(frozen=True)

    a: float = Field(..., gt=0.0)
    a1: float
    b1: float
    b: float

    @model_validator(mode="after")
    def _check_nesting(self) -> "IntervalPair":
        if not (self.a < self.a1 < self.b1 < self.b) or not math.isfinite(self.b):
            raise ValueError("intervals must satisfy 0 < a < a1 < b1 < b < inf")
        return self

    @property
    def outer(self):
        return (self.a, self.b)

    @property
    def inner(self):
        return (self.a1, self.b1)
