"""
Lazy steps module for the cubic Newton library.
Contains the inner loops that take up to m cubic steps around one Hessian
approximation, with the cumulative progress test deciding success or halt.
"""
import logging
from typing import List, Optional

import numpy as np

from .config import StepOptions
from .cubic_model import induced_subgradient, solve_subproblem
from .errors import BudgetExhausted, SubproblemStalled
from .finite_diff import zo_gradient_approx
from .models import (CubicModel, FDInterval, InnerResult, OracleCounter, ProblemInstance, StepRecord,
                     StepStatus, SymmetricMatrixApprox)
from .oracle import (counted_gradient, objective_value, stationarity_residual, xi_measure)

# Setup logging
logger = logging.getLogger(__name__)

# (2/3)^{10/3}, the factor turning xi^2 / sigma into a stationarity scale
_XI_FACTOR = (2.0 / 3.0) ** (10.0 / 3.0)


def progress_threshold(sigma: float, eps: float, t: int) -> float:
    """Cumulative decrease required after step t: eps^{3/2} (t+1) / (384 sigma^{1/2})."""
    if sigma <= 0 or eps <= 0 or t < 0:
        raise ValueError(f"need sigma, eps > 0 and t >= 0, got {sigma}, {eps}, {t}")
    return eps ** 1.5 * (t + 1) / (384.0 * np.sqrt(sigma))


def zero_order_gradient_interval(eps: float, m: int, sigma: float, n: int) -> float:
    """h_g = 3^{-1/3} (eps m / (sigma sqrt(n)))^{1/2}."""
    return 3.0 ** (-1.0 / 3.0) * np.sqrt(eps * m / (sigma * np.sqrt(n)))


def _check_inputs(B: SymmetricMatrixApprox, sigma: float, m: int, eps: float, n: int):
    if B.B.shape != (n, n):
        raise ValueError(f"approximation of shape {B.B.shape} for dim {n}")
    if not np.array_equal(B.B, B.B.T):
        raise ValueError("Hessian approximation must be symmetric")
    if sigma <= 0 or eps <= 0 or m < 1:
        raise ValueError(f"need sigma, eps > 0 and m >= 1, got {sigma}, {eps}, {m}")


def _second_order_fields(p: ProblemInstance, c: OracleCounter, x: np.ndarray,
                         stationarity: Optional[float], sigma: float, opts: StepOptions):
    if not opts.record_xi or not p.has_hessian:
        return None, None
    xi = xi_measure(p, x, c)
    if stationarity is None:
        return xi, None
    return xi, max(stationarity, _XI_FACTOR * xi * xi / sigma)


class _InnerLoop:
    """Shared bookkeeping of both inner loops."""

    def __init__(self, p: ProblemInstance, c: OracleCounter, x, B: SymmetricMatrixApprox,
                 sigma: float, m: int, eps: float, opts: StepOptions, f_x0: Optional[float]):
        self.p = p
        self.c = c
        self.anchor = np.asarray(x, dtype=float).copy()
        self.B = B
        self.sigma = float(sigma)
        self.m = m
        self.eps = eps
        self.opts = opts
        self.solve_opts = opts.solve_options()
        self.trace: List[StepRecord] = []
        self.x = self.anchor.copy()
        self.steps = 0
        self.F0 = objective_value(p, c, self.anchor) if f_x0 is None else float(f_x0)
        self.F = self.F0

    def model(self, g: np.ndarray) -> CubicModel:
        composite = self.p.composite
        return CubicModel(center=self.x, g=g, B=self.B.B, sigma=self.sigma,
                          composite=composite, f_center=self.F - composite.value(self.x))

    def record(self, t: int, r: float, F: Optional[float], grad_residual: float,
               stationarity: Optional[float], accepted: bool, x_next: np.ndarray):
        xi, delta = _second_order_fields(self.p, self.c, x_next, stationarity, self.sigma, self.opts)
        self.trace.append(StepRecord(t=t, r=r, F=F, grad_residual=grad_residual,
                                     stationarity=stationarity, accepted=accepted,
                                     f_evals=self.c.f_evals, grad_evals=self.c.grad_evals,
                                     xi=xi, delta=delta, point=x_next))

    def result(self, final: np.ndarray, status: StepStatus, final_f: Optional[float]) -> InnerResult:
        return InnerResult(final=final, status=status, steps_taken=self.steps, trace=self.trace,
                           anchor=self.anchor, sigma=self.sigma, final_f=final_f)

    def partial(self) -> InnerResult:
        return self.result(self.x.copy(), StepStatus.HALT, self.F)

    def progress_ok(self, F_next: float, t: int) -> bool:
        return bool(self.F0 - F_next >= progress_threshold(self.sigma, self.eps, t))


def cubic_steps(p: ProblemInstance, c: OracleCounter, x, B: SymmetricMatrixApprox,
                sigma: float, m: int, eps: float, opts: Optional[StepOptions] = None,
                f_x0: Optional[float] = None, grad_x0=None) -> InnerResult:
    """Up to m first-order cubic steps reusing B.

    f_x0 = F(x) and grad_x0 = grad f(x) may be supplied by the caller; each new
    point then costs one gradient and (unless it is a solution) one function call.
    """
    opts = opts or StepOptions()
    _check_inputs(B, sigma, m, eps, p.dim)
    loop = _InnerLoop(p, c, x, B, sigma, m, eps, opts, f_x0)
    try:
        g = counted_gradient(p, c, loop.x) if grad_x0 is None else np.asarray(grad_x0, dtype=float)
        for t in range(m):
            model = loop.model(g)
            try:
                solution = solve_subproblem(model, loop.solve_opts)
            except SubproblemStalled as e:
                logger.debug(f"subproblem stalled at t={t}: {e}")
                return loop.result(loop.x.copy(), StepStatus.HALT, loop.F)
            x_next = solution.x_plus
            g_next = counted_gradient(p, c, x_next)
            stationarity = stationarity_residual(p, g_next, induced_subgradient(model, solution))

            if not opts.second_order and stationarity <= eps:
                loop.record(t, solution.r, None, solution.grad_residual, stationarity, True, x_next)
                return loop.result(x_next, StepStatus.SOLUTION, None)

            F_next = objective_value(p, c, x_next)
            accepted = loop.progress_ok(F_next, t)
            loop.record(t, solution.r, F_next, solution.grad_residual, stationarity, accepted, x_next)
            if not accepted:
                return loop.result(x_next, StepStatus.HALT, F_next)
            loop.x, loop.F, g = x_next, F_next, g_next
            loop.steps = t + 1
    except BudgetExhausted as e:
        e.partial = loop.partial()
        raise
    return loop.result(loop.x, StepStatus.SUCCESS, loop.F)


def zero_order_cubic_steps(p: ProblemInstance, c: OracleCounter, x, B: SymmetricMatrixApprox,
                           sigma: float, m: int, eps: float, opts: Optional[StepOptions] = None,
                           f_x0: Optional[float] = None,
                           intervals: Optional[FDInterval] = None) -> InnerResult:
    """Up to m derivative-free cubic steps reusing B.

    Each step costs 2n function calls for the central-difference gradient and
    one for F(x_{t+1}); there is no stationarity exit. The gradient step is
    intervals.h_g when given, the scheduled h_g otherwise.
    """
    opts = opts or StepOptions()
    _check_inputs(B, sigma, m, eps, p.dim)
    loop = _InnerLoop(p, c, x, B, sigma, m, eps, opts, f_x0)
    h_g = intervals.h_g if intervals is not None else zero_order_gradient_interval(eps, m, sigma, p.dim)
    diagnostic = opts.diagnostic_gradient and p.has_gradient
    try:
        for t in range(m):
            g = zo_gradient_approx(p, c, loop.x, h_g)
            model = loop.model(g)
            try:
                solution = solve_subproblem(model, loop.solve_opts)
            except SubproblemStalled as e:
                logger.debug(f"subproblem stalled at t={t}: {e}")
                return loop.result(loop.x.copy(), StepStatus.HALT, loop.F)
            x_next = solution.x_plus
            stationarity = None
            if diagnostic:
                true_grad = counted_gradient(p, c, x_next)
                stationarity = stationarity_residual(p, true_grad, induced_subgradient(model, solution))

            F_next = objective_value(p, c, x_next)
            accepted = loop.progress_ok(F_next, t)
            loop.record(t, solution.r, F_next, solution.grad_residual, stationarity, accepted, x_next)
            if not accepted:
                return loop.result(x_next, StepStatus.HALT, F_next)
            loop.x, loop.F = x_next, F_next
            loop.steps = t + 1
    except BudgetExhausted as e:
        e.partial = loop.partial()
        raise
    return loop.result(loop.x, StepStatus.SUCCESS, loop.F)
