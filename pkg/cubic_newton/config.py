"""
Configuration module for the cubic Newton library.
Contains the pydantic option models and the environment-backed defaults.
"""
import os
from enum import Enum
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field

from .models import BudgetKind

# Load environment variables
load_dotenv()

# Protocol defaults (tau0 = 1, eps = 1e-4, 3000 oracle calls)
DEFAULT_TAU0 = 1.0
DEFAULT_EPS = 1e-4
DEFAULT_BUDGET = 3000
DEFAULT_ELL_MAX = 60


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    return int(raw)


DEFAULT_MAX_INNER_ITERS = _env_int("CNM_MAX_INNER_ITERS", 500)


class SolverMethod(str, Enum):
    """Subproblem solver selection."""
    AUTO = "auto"
    SPECTRAL = "spectral"
    BFGS = "bfgs"
    PROX_GRAD = "prox_grad"


class SolveOptions(BaseModel):
    """Options for one cubic subproblem solve."""
    method: SolverMethod = SolverMethod.AUTO
    require_second_order: bool = False
    max_inner_iters: int = Field(default=DEFAULT_MAX_INNER_ITERS, ge=1)
    armijo_c: float = Field(default=1e-4, gt=0, lt=1)
    backtrack: float = Field(default=0.5, gt=0, lt=1)
    second_order_tol: float = Field(default=1e-10, ge=0)


class StepOptions(BaseModel):
    """Options for one lazy inner loop."""
    second_order: bool = False
    record_xi: bool = False
    diagnostic_gradient: bool = False
    solve: SolveOptions = Field(default_factory=SolveOptions)

    def solve_options(self) -> SolveOptions:
        if self.second_order and not self.solve.require_second_order:
            return self.solve.model_copy(update={"require_second_order": True})
        return self.solve


class DriverConfig(BaseModel):
    """Configuration of the outer adaptive loop."""
    tau0: float = Field(default=DEFAULT_TAU0, gt=0)
    eps: float = Field(default=DEFAULT_EPS, gt=0)
    m: Optional[int] = Field(default=None, ge=1)
    budget: Optional[int] = Field(default=DEFAULT_BUDGET, ge=1)
    budget_kind: Optional[BudgetKind] = None
    ell_max: int = Field(default=DEFAULT_ELL_MAX, ge=1)
    second_order: bool = False
    record_trace: bool = False
    trace_stop: bool = True
    solve: SolveOptions = Field(default_factory=SolveOptions)

    def resolved_m(self, n: int) -> int:
        """m := n unless set explicitly."""
        return self.m if self.m is not None else n
