"""Evaluable test functions on [0, inf) with exact derivatives and growth metadata."""

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Tuple

import numpy as np

from hybridop.core.errors import DomainError, MissingDerivativeError

Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FunctionSpec:
    """
    A function f with derivatives f', ..., f^(r_max).

    Evaluators are vectorized (ndarray in, ndarray out) and must be safe to call
    from several threads at once. Growth: |f(t)| <= growth_constant * (1 + t)^growth_degree
    * exp(growth_rate * t) for t >= 0, and the same bound holds for every listed derivative.
    """
    evaluator: Evaluator
    derivatives: Tuple[Evaluator, ...] = ()
    growth_rate: float = 0.0
    growth_constant: float = 1.0
    growth_degree: int = 0
    kinks: Tuple[float, ...] = ()
    label: str = "f"
    domain: Tuple[float, float] = field(default=(0.0, math.inf))
    coefficients: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.growth_rate < 0 or self.growth_constant <= 0 or self.growth_degree < 0:
            raise DomainError("invalid growth metadata", label=self.label)
        object.__setattr__(self, "kinks", tuple(sorted(float(k) for k in self.kinks)))

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        values = np.asarray(self.evaluator(t), dtype=float)
        if values.shape != t.shape:
            values = np.array(np.broadcast_to(values, t.shape), dtype=float)
        return values

    def derivative_spec(self, r: int) -> "FunctionSpec":
        """FunctionSpec of f^(r), keeping the remaining derivatives."""
        if r < 0:
            raise DomainError("derivative order must be nonnegative", r=r)
        if r == 0:
            return self
        if r > len(self.derivatives):
            raise MissingDerivativeError(
                "function does not supply the requested derivative",
                label=self.label, requested=r, available=len(self.derivatives),
            )
        chain = (self.evaluator,) + self.derivatives
        coefficients = None
        if self.coefficients is not None:
            derived = np.polynomial.polynomial.polyder(np.asarray(self.coefficients, dtype=float), r)
            coefficients = tuple(float(v) for v in derived) or (0.0,)
        return replace(
            self, evaluator=chain[r], derivatives=chain[r + 1:], label=f"{self.label}^({r})",
            coefficients=coefficients,
        )

    def check_nodes(self, t: np.ndarray) -> None:
        """Raise DomainError if any node lies outside the domain."""
        lo, hi = self.domain
        t = np.asarray(t, dtype=float)
        if t.size and (t.min() < lo - 1e-15 * max(1.0, abs(lo)) or t.max() > hi):
            raise DomainError(
                "node outside function domain",
                label=self.label, node_min=float(t.min()), node_max=float(t.max()), domain=self.domain,
            )
