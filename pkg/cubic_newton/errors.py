"""
Errors module for the cubic Newton library.
Contains the exception hierarchy raised by oracles, solvers and drivers.
"""
from typing import Any, Optional


class CubicNewtonError(Exception):
    """Base class for every error raised by this package."""


class BudgetExhausted(CubicNewtonError):
    """The budgeted oracle tally reached its limit before a call."""

    def __init__(self, message: str, partial: Optional[Any] = None):
        super().__init__(message)
        # InnerResult collected before the budget ran out (set by lazy_steps)
        self.partial = partial


class NonFiniteValue(CubicNewtonError):
    """An oracle returned NaN/inf, or was queried at a non-finite point."""


class NoGradientOracle(CubicNewtonError):
    """Gradient requested from a zeroth-order-only problem."""


class NoHessianOracle(CubicNewtonError):
    """Analytic Hessian requested from a problem that has none."""


class DimensionMismatch(CubicNewtonError, ValueError):
    """Vector or matrix shapes disagree."""


class SubproblemStalled(CubicNewtonError):
    """The iterative subproblem solver hit its cap without a certificate."""


class UnsupportedComposite(CubicNewtonError):
    """A custom composite term cannot be handled (no prox available)."""


class InfeasibleStart(CubicNewtonError, ValueError):
    """The starting point lies outside dom psi."""


class UnknownProblem(CubicNewtonError, KeyError):
    """Problem name not present in the catalog."""

    def __str__(self) -> str:
        # KeyError quotes its argument; keep plain messages in logs
        return str(self.args[0]) if self.args else ""


class EmptyInput(CubicNewtonError, ValueError):
    """Nothing left to build a performance profile from."""
