"""
Driver module for the cubic Newton library.
Contains the adaptive outer loops (first-order and zeroth-order), the sigma
and finite-difference schedules and the tau update.
"""
import logging
from typing import List, Optional

import numpy as np

from .config import DriverConfig, StepOptions
from .errors import BudgetExhausted, DimensionMismatch, InfeasibleStart, NoGradientOracle, NonFiniteValue
from .finite_diff import fo_hessian_approx, zo_hessian_approx
from .lazy_steps import cubic_steps, zero_order_cubic_steps, zero_order_gradient_interval
from .models import (AttemptRecord, BudgetKind, FDInterval, InnerResult, OracleCounter, OuterRecord,
                     ProblemInstance, RunReport, StepStatus, StopMode, Termination, TraceRow)
from .oracle import objective_value

# Setup logging
logger = logging.getLogger(__name__)

# 2^4 (2/3)^{1/3}
SIGMA_CONSTANT = 16.0 * (2.0 / 3.0) ** (1.0 / 3.0)


def _positive(**values):
    for name, value in values.items():
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value}")


def fo_sigma_schedule(tau: float, ell: int, m: int) -> float:
    """sigma_{k,ell} = 2^4 (2/3)^{1/3} 2^ell tau m."""
    _positive(tau=tau, m=m)
    if ell < 0:
        raise ValueError(f"ell must be nonnegative, got {ell}")
    return SIGMA_CONSTANT * 2.0 ** ell * tau * m


def fo_h_schedule(sigma: float, tau_eff: float, eps: float, n: int) -> float:
    """[3 sigma^{3/2} eps^{3/2} / (2^7 192 n^{3/2} tau_eff^3)]^{1/3}."""
    _positive(sigma=sigma, tau_eff=tau_eff, eps=eps, n=n)
    return float(np.cbrt(3.0 * (sigma * eps) ** 1.5 / (2.0 ** 7 * 192.0 * n ** 1.5 * tau_eff ** 3)))


def zo_h_schedule(sigma: float, tau_eff: float, eps: float, n: int) -> float:
    """[3^4 sigma^{3/2} eps^{3/2} / (2^14 192 n^3 tau_eff^3)]^{1/3}."""
    _positive(sigma=sigma, tau_eff=tau_eff, eps=eps, n=n)
    return float(np.cbrt(81.0 * (sigma * eps) ** 1.5 / (2.0 ** 14 * 192.0 * float(n) ** 3 * tau_eff ** 3)))


def tau_update(tau_k: float, tau0: float, ell_k: int) -> float:
    """tau_{k+1} = max{tau0, 2^{ell_k - 1} tau_k}."""
    _positive(tau_k=tau_k, tau0=tau0)
    return max(tau0, 2.0 ** (ell_k - 1) * tau_k)


class _AdaptiveSearch:
    """One run of the adaptive loop; owns its counter and all records."""

    def __init__(self, method: str, p: ProblemInstance, x0, cfg: DriverConfig):
        self.method = method
        self.p = p
        self.cfg = cfg
        self.n = p.dim
        self.m = cfg.resolved_m(p.dim)
        x0 = np.asarray(x0, dtype=float)
        if x0.shape != (p.dim,):
            raise DimensionMismatch(f"x0 of shape {x0.shape} for dim {p.dim}")
        if not p.composite.in_domain(x0):
            raise InfeasibleStart(f"x0 is outside the domain of psi on '{p.name}'")
        if method == "fo" and not p.has_gradient:
            raise NoGradientOracle(f"first-order method needs a gradient on '{p.name}'")
        self.x0 = x0

        kind = cfg.budget_kind or (BudgetKind.FO_CALLS if method == "fo" else BudgetKind.ZO_CALLS)
        self.counter = OracleCounter(budget=cfg.budget, budget_kind=kind)
        self.step_opts = StepOptions(second_order=cfg.second_order,
                                     record_xi=cfg.second_order,
                                     diagnostic_gradient=method == "zo" and cfg.record_trace,
                                     solve=cfg.solve)

        self.k = 0
        self.tau = cfg.tau0
        self.tau_history: List[float] = []
        self.ell_history: List[int] = []
        self.attempts: List[AttemptRecord] = []
        self.outer_history: List[OuterRecord] = []
        self.rows: List[TraceRow] = []
        self.best_x = x0.copy()
        self.best_f = np.inf
        self.initial_f = np.nan
        self.best_stationarity = np.inf
        self.final: Optional[np.ndarray] = None
        self.stop_mode = StopMode.ALGORITHMIC

    def _schedule(self, ell: int):
        sigma = fo_sigma_schedule(self.tau, ell, self.m)
        tau_eff = 2.0 ** ell * self.tau
        eps = self.cfg.eps
        h_schedule = fo_h_schedule if self.method == "fo" else zo_h_schedule
        intervals = FDInterval(h=h_schedule(sigma, tau_eff, eps, self.n),
                               h_g=zero_order_gradient_interval(eps, self.m, sigma, self.n))
        return sigma, intervals

    def _attempt(self, x_k: np.ndarray, F_k: float, sigma: float, intervals: FDInterval) -> InnerResult:
        p, c, cfg = self.p, self.counter, self.cfg
        if self.method == "fo":
            B = fo_hessian_approx(p, c, x_k, intervals.h)
            return cubic_steps(p, c, x_k, B, sigma, self.m, cfg.eps, self.step_opts,
                               f_x0=F_k, grad_x0=B.base_gradient)
        B = zo_hessian_approx(p, c, x_k, intervals.h)
        return zero_order_cubic_steps(p, c, x_k, B, sigma, self.m, cfg.eps, self.step_opts,
                                      f_x0=F_k, intervals=intervals)

    def _absorb(self, inner: Optional[InnerResult], ell: int, sigma: float, h: float,
                interrupted: bool = False):
        """Fold an inner trace into the run records; return a trace-checked stop point."""
        status = inner.status if inner is not None and not interrupted else None
        steps = inner.steps_taken if inner is not None else 0
        self.attempts.append(AttemptRecord(k=self.k, ell=ell, tau=self.tau, sigma=sigma, h=h,
                                           status=status, steps_taken=steps))
        logger.debug(f"attempt k={self.k} ell={ell} sigma={sigma:.6g} h={h:.6g} "
                     f"status={status.value if status else 'interrupted'} steps={steps}")
        if inner is None:
            return None

        stop_at = None
        for rec in inner.trace:
            if rec.F is not None and rec.F < self.best_f:
                self.best_f, self.best_x = rec.F, rec.point.copy()
            if rec.stationarity is not None:
                self.best_stationarity = min(self.best_stationarity, rec.stationarity)
            if self.cfg.record_trace:
                self.rows.append(TraceRow(k=self.k, ell=ell, t=rec.t, sigma=sigma, h=h,
                                          f_evals=rec.f_evals, grad_evals=rec.grad_evals, F=rec.F,
                                          grad_residual=rec.grad_residual,
                                          stationarity=rec.stationarity, accepted=rec.accepted,
                                          xi=rec.xi, delta=rec.delta))
            if stop_at is None and self._trace_stop(rec):
                stop_at = rec.point.copy()
        return stop_at

    def _trace_stop(self, rec) -> bool:
        cfg = self.cfg
        if not (cfg.record_trace and cfg.trace_stop):
            return False
        if cfg.second_order and rec.delta is not None:
            return rec.delta <= cfg.eps
        if self.method == "zo" and not cfg.second_order and rec.stationarity is not None:
            return rec.stationarity <= cfg.eps
        return False

    def _outer_loop(self) -> Termination:
        x_k = self.x0.copy()
        F_k = objective_value(self.p, self.counter, x_k)
        self.initial_f = self.best_f = F_k
        self.outer_history.append(OuterRecord(k=0, x=x_k.copy(), F=F_k, tau=self.tau))
        while True:
            self.tau_history.append(self.tau)
            inner = None
            for ell in range(self.cfg.ell_max + 1):
                sigma, intervals = self._schedule(ell)
                h = intervals.h
                try:
                    inner = self._attempt(x_k, F_k, sigma, intervals)
                except BudgetExhausted as e:
                    stop_at = self._absorb(e.partial, ell, sigma, h, interrupted=True)
                    if stop_at is not None:
                        return self._trace_checked(stop_at)
                    raise
                stop_at = self._absorb(inner, ell, sigma, h)
                if stop_at is not None:
                    return self._trace_checked(stop_at)
                if inner.status is StepStatus.SOLUTION:
                    self.ell_history.append(ell)
                    self.final = inner.final
                    return Termination.SOLUTION_FOUND
                if inner.status is StepStatus.SUCCESS:
                    break
            else:
                logger.warning(f"⚠️ ell exceeded {self.cfg.ell_max} at k={self.k} on '{self.p.name}' "
                               f"(best F={self.best_f:.6g}, best stationarity="
                               f"{self.best_stationarity:.3g})")
                return Termination.ELL_OVERFLOW

            self.ell_history.append(ell)
            self.tau = tau_update(self.tau, self.cfg.tau0, ell)
            x_k, F_k = inner.final, inner.final_f
            self.k += 1
            if F_k < self.best_f:
                self.best_f, self.best_x = F_k, x_k.copy()
            self.outer_history.append(OuterRecord(k=self.k, x=x_k.copy(), F=F_k, tau=self.tau,
                                                  ell=ell, sigma=sigma))

    def _trace_checked(self, point: np.ndarray) -> Termination:
        self.stop_mode = StopMode.TRACE_CHECKED
        self.final = point
        return Termination.SOLUTION_FOUND

    def run(self) -> RunReport:
        p = self.p
        logger.info(f"🔍 {self.method.upper()} run on '{p.name}' (n={self.n}, m={self.m}, "
                    f"eps={self.cfg.eps}, budget={self.cfg.budget})")
        try:
            termination = self._outer_loop()
        except BudgetExhausted:
            termination = Termination.BUDGET_EXHAUSTED
        except NonFiniteValue as e:
            logger.warning(f"❌ aborting '{p.name}': {e}")
            termination = Termination.NONFINITE_VALUE
        final = self.final if self.final is not None else self.best_x

        report = RunReport(method=self.method, problem=p.name, m=self.m, final=final,
                           outer_iters=self.k, termination=termination, stop_mode=self.stop_mode,
                           tau_history=self.tau_history, ell_history=self.ell_history,
                           oracle_totals=self.counter.snapshot(),
                           best_stationarity=float(self.best_stationarity),
                           best_f=float(self.best_f), initial_f=float(self.initial_f),
                           attempts=self.attempts, outer_history=self.outer_history,
                           full_trace=self.rows if self.cfg.record_trace else None)
        marker = "✅" if termination is Termination.SOLUTION_FOUND else "❌"
        logger.info(f"{marker} {self.method.upper()} on '{p.name}': {termination.value} after "
                    f"{self.k} outer iterations, f_evals={self.counter.f_evals}, "
                    f"grad_evals={self.counter.grad_evals}")
        return report


def first_order_cnm(p: ProblemInstance, x0, cfg: Optional[DriverConfig] = None) -> RunReport:
    """Adaptive first-order cubic Newton with lazy finite-difference Hessians."""
    return _AdaptiveSearch("fo", p, x0, cfg or DriverConfig()).run()


def zero_order_cnm(p: ProblemInstance, x0, cfg: Optional[DriverConfig] = None) -> RunReport:
    """Adaptive zeroth-order cubic Newton using function values only."""
    return _AdaptiveSearch("zo", p, x0, cfg or DriverConfig()).run()
