"""
Exception hierarchy.

Numeric failures carry the offending parameters (n, x, k, ...) in ``context`` so
that a failing grid point can be reproduced from the message alone.
"""

from typing import Any, Dict


class HybridOpError(Exception):
    """Base class for every error raised by hybridop."""

    def __init__(self, message: str, **context: Any):
        self.message = message
        self.context: Dict[str, Any] = dict(context)
        super().__init__(self._render())

    def _render(self) -> str:
        if not self.context:
            return self.message
        details = ", ".join(f"{key}={value!r}" for key, value in self.context.items())
        return f"{self.message} ({details})"

    def with_context(self, **context: Any) -> "HybridOpError":
        """Add context while propagating; existing keys win."""
        for key, value in context.items():
            self.context.setdefault(key, value)
        self.args = (self._render(),)
        return self

    def __str__(self) -> str:
        return self._render()


class DomainError(HybridOpError, ValueError):
    """Argument outside the mathematical domain, or a node outside f's domain."""


class GrowthError(DomainError):
    """Integrand grows too fast for the requested n (γ ≥ n or divergent tilted series)."""


class PoleError(DomainError):
    """Moment generating function evaluated at or beyond its pole."""


class HTooLargeError(DomainError):
    """Steklov sample points escape the outer interval."""


class MissingDerivativeError(HybridOpError):
    """FunctionSpec does not supply the requested derivative order."""


class NonConvergentError(HybridOpError):
    """Adaptive quadrature did not meet tolerance within the refinement limit."""


class TruncationCapError(HybridOpError):
    """Truncation window would exceed the configured hard cap."""


class InsufficientDataError(HybridOpError):
    """Too few usable (n, error) pairs to fit an order."""


class ConfigError(HybridOpError):
    """Run configuration could not be parsed or validated."""
