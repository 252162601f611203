"""
Models module for the cubic Newton library.
Contains data classes and types used throughout the optimization pipeline.
"""
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, List, Optional

import numpy as np

from .errors import BudgetExhausted, UnsupportedComposite

VectorMap = Callable[[np.ndarray], np.ndarray]
ScalarMap = Callable[[np.ndarray], float]


class CompositeKind(str, Enum):
    """Enum for the simple convex term psi."""
    ZERO = "zero"
    BOX = "box_indicator"
    L1 = "l1"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class CompositeDescriptor:
    """The composite part psi of F = f + psi.

    Built-in kinds are proper, closed and convex by construction; for
    ``custom`` that is the caller's obligation.
    """
    kind: CompositeKind = CompositeKind.ZERO
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    weight: float = 0.0
    custom_value: Optional[ScalarMap] = None
    custom_prox: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    custom_hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None

    @classmethod
    def zero(cls) -> "CompositeDescriptor":
        return cls(kind=CompositeKind.ZERO)

    @classmethod
    def box(cls, lower, upper) -> "CompositeDescriptor":
        lo = np.atleast_1d(np.asarray(lower, dtype=float))
        hi = np.atleast_1d(np.asarray(upper, dtype=float))
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise ValueError("box bounds must not be NaN")
        if np.any(lo > hi):
            raise ValueError("box lower bound exceeds upper bound")
        return cls(kind=CompositeKind.BOX, lower=lo, upper=hi)

    @classmethod
    def l1(cls, weight: float) -> "CompositeDescriptor":
        if not np.isfinite(weight) or weight < 0:
            raise ValueError(f"l1 weight must be finite and nonnegative, got {weight}")
        return cls(kind=CompositeKind.L1, weight=float(weight))

    @classmethod
    def custom(cls, value: ScalarMap, prox=None, hessian=None) -> "CompositeDescriptor":
        return cls(kind=CompositeKind.CUSTOM, custom_value=value,
                   custom_prox=prox, custom_hessian=hessian)

    @property
    def is_zero(self) -> bool:
        return self.kind is CompositeKind.ZERO

    @property
    def has_prox(self) -> bool:
        return self.kind is not CompositeKind.CUSTOM or self.custom_prox is not None

    def _bounds(self, x: np.ndarray):
        return np.broadcast_to(self.lower, x.shape), np.broadcast_to(self.upper, x.shape)

    def value(self, x: np.ndarray) -> float:
        """psi(x), +inf outside the domain."""
        if self.kind is CompositeKind.ZERO:
            return 0.0
        if self.kind is CompositeKind.BOX:
            lo, hi = self._bounds(x)
            return 0.0 if np.all(x >= lo) and np.all(x <= hi) else float("inf")
        if self.kind is CompositeKind.L1:
            return self.weight * float(np.sum(np.abs(x)))
        return float(self.custom_value(x))

    def in_domain(self, x: np.ndarray) -> bool:
        return bool(np.isfinite(self.value(x)))

    def prox(self, z: np.ndarray, t: float) -> np.ndarray:
        """argmin_y { t*psi(y) + 0.5*||y - z||^2 }."""
        if self.kind is CompositeKind.ZERO:
            return z.copy()
        if self.kind is CompositeKind.BOX:
            lo, hi = self._bounds(z)
            return np.clip(z, lo, hi)
        if self.kind is CompositeKind.L1:
            return np.sign(z) * np.maximum(np.abs(z) - t * self.weight, 0.0)
        if self.custom_prox is None:
            raise UnsupportedComposite("custom composite has no prox operator")
        return np.asarray(self.custom_prox(z, t), dtype=float)

    def closest_subgradient(self, y: np.ndarray, direction: np.ndarray) -> Optional[np.ndarray]:
        """The v in subdiff psi(y) minimising ||direction + v||.

        Returns None for custom terms, whose subdifferential is unknown here.
        """
        if self.kind is CompositeKind.ZERO:
            return np.zeros_like(y)
        if self.kind is CompositeKind.BOX:
            lo, hi = self._bounds(y)
            v = np.zeros_like(y)
            at_lower = y <= lo
            at_upper = y >= hi
            # normal cone: v <= 0 on the lower face, v >= 0 on the upper face
            v = np.where(at_lower, np.minimum(0.0, -direction), v)
            v = np.where(at_upper, np.maximum(0.0, -direction), v)
            v = np.where(at_lower & at_upper, -direction, v)
            return v
        if self.kind is CompositeKind.L1:
            w = self.weight
            return np.where(y == 0.0, np.clip(-direction, -w, w), w * np.sign(y))
        return None

    def hessian(self, y: np.ndarray) -> np.ndarray:
        """Hessian of psi where it is twice differentiable (zero for built-ins)."""
        if self.kind is not CompositeKind.CUSTOM:
            return np.zeros((y.size, y.size))
        if self.custom_hessian is None:
            raise UnsupportedComposite("custom composite has no Hessian")
        return np.asarray(self.custom_hessian(y), dtype=float)


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Composite problem min F(x) = f(x) + psi(x)."""
    dim: int
    smooth_value: ScalarMap
    smooth_gradient: Optional[VectorMap] = None
    smooth_hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    composite: CompositeDescriptor = field(default_factory=CompositeDescriptor.zero)
    known_L: Optional[float] = None
    known_mu: Optional[float] = None
    lower_bound_hint: Optional[float] = None
    name: str = "problem"

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        if self.known_L is not None and self.known_L < 0:
            raise ValueError("known_L must be nonnegative")
        if self.known_mu is not None and self.known_mu <= 0:
            raise ValueError("known_mu must be positive")

    @property
    def has_gradient(self) -> bool:
        return self.smooth_gradient is not None

    @property
    def has_hessian(self) -> bool:
        return self.smooth_hessian is not None

    def composite_value(self, x: np.ndarray) -> float:
        return self.composite.value(x)


class BudgetKind(str, Enum):
    """Which tally a budget limits."""
    FO_CALLS = "fo_calls"
    ZO_CALLS = "zo_calls"


@dataclass
class OracleCounter:
    """Oracle accounting for one run.

    fo_calls = f_evals + grad_evals and zo_calls = f_evals are tracked at the
    same time; hess_evals is never charged to a budget.
    """
    f_evals: int = 0
    grad_evals: int = 0
    hess_evals: int = 0
    budget: Optional[int] = None
    budget_kind: BudgetKind = BudgetKind.FO_CALLS

    @property
    def fo_calls(self) -> int:
        return self.f_evals + self.grad_evals

    @property
    def zo_calls(self) -> int:
        return self.f_evals

    @property
    def tally(self) -> int:
        return self.fo_calls if self.budget_kind is BudgetKind.FO_CALLS else self.zo_calls

    @property
    def remaining(self) -> Optional[int]:
        if self.budget is None:
            return None
        return max(self.budget - self.tally, 0)

    def _ensure_budget(self):
        if self.remaining == 0:
            raise BudgetExhausted(
                f"{self.budget_kind.value} budget of {self.budget} exhausted")

    def charge_value(self):
        self._ensure_budget()
        self.f_evals += 1

    def charge_gradient(self):
        if self.budget_kind is BudgetKind.FO_CALLS:
            self._ensure_budget()
        self.grad_evals += 1

    def charge_hessian(self):
        self.hess_evals += 1

    def snapshot(self) -> "OracleCounter":
        return replace(self)

    def as_dict(self) -> Dict[str, Optional[int]]:
        return {
            "f_evals": self.f_evals,
            "grad_evals": self.grad_evals,
            "hess_evals": self.hess_evals,
            "fo_calls": self.fo_calls,
            "zo_calls": self.zo_calls,
            "budget": self.budget,
            "budget_kind": self.budget_kind.value,
        }


class ApproxSource(str, Enum):
    """Where a Hessian approximation came from."""
    FO_FROM_GRADIENTS = "fo_from_gradients"
    ZO_FROM_VALUES = "zo_from_values"
    ANALYTIC = "analytic"


@dataclass(frozen=True)
class FDInterval:
    """Finite-difference steps: h for Hessians, h_g for the ZO gradient."""
    h: float
    h_g: float

    def __post_init__(self):
        for label, value in (("h", self.h), ("h_g", self.h_g)):
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{label} must be positive and finite, got {value}")


@dataclass(frozen=True, eq=False)
class SymmetricMatrixApprox:
    """Symmetric Hessian approximation B = (A + A^T)/2."""
    B: np.ndarray
    source: ApproxSource
    h_used: Optional[float] = None
    base_gradient: Optional[np.ndarray] = None
    base_value: Optional[float] = None


@dataclass(eq=False)
class CubicModel:
    """M_{x,sigma}(y) = f(x) + <g, y-x> + <B(y-x), y-x>/2 + sigma/6 ||y-x||^3."""
    center: np.ndarray
    g: np.ndarray
    B: np.ndarray
    sigma: float
    composite: CompositeDescriptor = field(default_factory=CompositeDescriptor.zero)
    f_center: float = 0.0


@dataclass(eq=False)
class SubproblemSolution:
    """Trial point of one cubic step together with its certificates."""
    x_plus: np.ndarray
    psi_sub: np.ndarray
    r: float
    model_decrease_ok: bool
    grad_residual: float
    so_margin: Optional[float] = None
    method: str = "spectral"
    iterations: int = 0


class StepStatus(str, Enum):
    """Outcome of one lazy inner loop."""
    SUCCESS = "success"
    SOLUTION = "solution"
    HALT = "halt"


@dataclass(eq=False)
class StepRecord:
    """One inner point x_{t+1}."""
    t: int
    r: float
    F: Optional[float]
    grad_residual: float
    stationarity: Optional[float]
    accepted: bool
    f_evals: int
    grad_evals: int
    xi: Optional[float] = None
    delta: Optional[float] = None
    point: Optional[np.ndarray] = None


@dataclass(eq=False)
class InnerResult:
    """Return value of CubicSteps / ZeroOrderCubicSteps."""
    final: np.ndarray
    status: StepStatus
    steps_taken: int
    trace: List[StepRecord]
    anchor: np.ndarray
    sigma: float
    final_f: Optional[float] = None


class Termination(str, Enum):
    """Why a driver run ended.

    ELL_OVERFLOW means no sigma up to 2^ell_max tau m gave the required
    decrease. Besides a smoothness violation this also happens once a
    derivative-free run sits at a minimizer to rounding accuracy, since F
    cannot drop any further; best_f and best_stationarity then still
    describe the converged point.
    """
    SOLUTION_FOUND = "solution_found"
    BUDGET_EXHAUSTED = "budget_exhausted"
    ELL_OVERFLOW = "ell_overflow"
    NONFINITE_VALUE = "nonfinite_value"


class StopMode(str, Enum):
    """Whether termination came from the algorithm itself or a trace check."""
    ALGORITHMIC = "algorithmic"
    TRACE_CHECKED = "trace_checked"


@dataclass
class AttemptRecord:
    """One (k, ell) attempt of the adaptive search."""
    k: int
    ell: int
    tau: float
    sigma: float
    h: float
    status: Optional[StepStatus]
    steps_taken: int


@dataclass(eq=False)
class OuterRecord:
    """An accepted outer iterate x_k."""
    k: int
    x: np.ndarray
    F: float
    tau: float
    ell: Optional[int] = None
    sigma: Optional[float] = None


@dataclass
class TraceRow:
    """Flattened inner record, one per evaluated point."""
    k: int
    ell: int
    t: int
    sigma: float
    h: float
    f_evals: int
    grad_evals: int
    F: Optional[float]
    grad_residual: float
    stationarity: Optional[float]
    accepted: bool = True
    xi: Optional[float] = None
    delta: Optional[float] = None


@dataclass(eq=False)
class RunReport:
    """Everything a driver run produced."""
    method: str
    problem: str
    m: int
    final: np.ndarray
    outer_iters: int
    termination: Termination
    stop_mode: StopMode
    tau_history: List[float]
    ell_history: List[int]
    oracle_totals: OracleCounter
    best_stationarity: float
    best_f: float
    initial_f: float
    attempts: List[AttemptRecord] = field(default_factory=list)
    outer_history: List[OuterRecord] = field(default_factory=list)
    full_trace: Optional[List[TraceRow]] = None

    @property
    def max_sigma(self) -> float:
        return max((a.sigma for a in self.attempts), default=0.0)

    def summary(self) -> Dict[str, object]:
        """Plain-dict view used by the CLI."""
        return {
            "method": self.method,
            "problem": self.problem,
            "m": self.m,
            "termination": self.termination.value,
            "stop_mode": self.stop_mode.value,
            "outer_iters": self.outer_iters,
            "best_f": self.best_f,
            "initial_f": self.initial_f,
            "best_stationarity": self.best_stationarity,
            "final": [float(v) for v in self.final],
            "tau_history": list(self.tau_history),
            "ell_history": list(self.ell_history),
            "oracle_totals": self.oracle_totals.as_dict(),
        }
