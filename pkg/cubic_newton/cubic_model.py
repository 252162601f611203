"""
Cubic model module for the cubic Newton library.
Contains the regularized model M_{x,sigma}, its subproblem solvers and the
acceptance certificates checked on every trial point.

A trial point x+ is accepted when
    M(x+) + psi(x+) <= F(x)                                   (model decrease)
    ||grad M(x+) + psi'(x+)|| <= sigma/4 ||x+ - x||^2          (first order)
and, on request,
    lambda_min(B + sigma ||x+ - x|| I + hess psi(x+)) >= 0     (second order).
"""
import logging
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import eigh, eigvalsh
from scipy.optimize import brentq

from .config import SolveOptions, SolverMethod
from .errors import DimensionMismatch, SubproblemStalled, UnsupportedComposite
from .models import CompositeKind, CubicModel, SubproblemSolution

# Setup logging
logger = logging.getLogger(__name__)

_EPS = np.finfo(float).eps
# stationarity demanded when the step has zero length
_CENTER_TOL = 1e-10
# |g_hat_i| below this (relative) counts as orthogonal to an eigenvector
_HARD_CASE_TOL = 1e-14
_MAX_KICKS = 3


def _validate(m: CubicModel):
    n = m.center.shape[0]
    if m.center.shape != (n,) or m.g.shape != (n,) or m.B.shape != (n, n):
        raise DimensionMismatch(
            f"center {m.center.shape}, g {m.g.shape} and B {m.B.shape} disagree")
    if not np.isfinite(m.sigma) or m.sigma <= 0:
        raise ValueError(f"sigma must be positive and finite, got {m.sigma}")


def _step(m: CubicModel, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != m.center.shape:
        raise DimensionMismatch(f"point of shape {y.shape} for model of dim {m.center.size}")
    return y - m.center


def _increment_terms(m: CubicModel, s: np.ndarray) -> Tuple[float, float, float]:
    r = float(np.linalg.norm(s))
    return float(m.g @ s), 0.5 * float(s @ (m.B @ s)), m.sigma / 6.0 * r ** 3


def model_increment(m: CubicModel, y) -> float:
    """M_{x,sigma}(y) - f(x)."""
    return sum(_increment_terms(m, _step(m, y)))


def model_value(m: CubicModel, y) -> float:
    """M_{x,sigma}(y), the smooth model only."""
    return m.f_center + model_increment(m, y)


def model_gradient(m: CubicModel, y) -> np.ndarray:
    """g + B(y - x) + sigma/2 ||y - x|| (y - x)."""
    s = _step(m, y)
    return m.g + m.B @ s + 0.5 * m.sigma * float(np.linalg.norm(s)) * s


def check_second_order(m: CubicModel, s: SubproblemSolution, hess_psi) -> float:
    """lambda_min(B + sigma r I + hess psi(x+))."""
    n = m.center.size
    hess_psi = np.asarray(hess_psi, dtype=float)
    if hess_psi.shape != (n, n):
        raise DimensionMismatch(f"hess_psi of shape {hess_psi.shape} for dim {n}")
    M = m.B + m.sigma * s.r * np.eye(n) + hess_psi
    return float(eigvalsh(0.5 * (M + M.T), subset_by_index=[0, 0])[0])


def induced_subgradient(m: CubicModel, s: SubproblemSolution) -> np.ndarray:
    """The composite subgradient certified by the solver at x+."""
    return s.psi_sub.copy()


def _certify(m: CubicModel, y: np.ndarray, psi_sub: np.ndarray, opts: SolveOptions,
             method: str, iterations: int) -> Tuple[SubproblemSolution, bool]:
    s = y - m.center
    r = float(np.linalg.norm(s))
    grad_residual = float(np.linalg.norm(model_gradient(m, y) + psi_sub))

    terms = _increment_terms(m, s)
    psi_change = m.composite.value(y) - m.composite.value(m.center)
    slack = 4.0 * _EPS * sum(abs(v) for v in terms)
    decrease_ok = bool(sum(terms) + psi_change <= slack)

    if r > 0:
        first_order_ok = grad_residual <= 0.25 * m.sigma * r * r
    else:
        first_order_ok = grad_residual <= _CENTER_TOL * (1.0 + float(np.linalg.norm(m.g)))

    solution = SubproblemSolution(x_plus=y, psi_sub=psi_sub, r=r,
                                  model_decrease_ok=decrease_ok,
                                  grad_residual=grad_residual,
                                  method=method, iterations=iterations)
    accepted = decrease_ok and first_order_ok
    if opts.require_second_order:
        solution.so_margin = check_second_order(m, solution, m.composite.hessian(y))
        tol = opts.second_order_tol * (1.0 + float(np.linalg.norm(m.B, 2)))
        accepted = accepted and solution.so_margin >= -tol
    return solution, accepted


def _spectral_step(g: np.ndarray, B: np.ndarray, sigma: float) -> np.ndarray:
    """Global minimizer of <g,s> + <Bs,s>/2 + sigma/6 ||s||^3.

    Finds lambda >= max(0, -lambda_min(B)) with (B + lambda I)s = -g and
    ||s|| = 2 lambda / sigma; the hard case is completed along the leading
    eigenvector.
    """
    eigvals, V = eigh(0.5 * (B + B.T))
    n = g.size
    scale = max(1.0, float(np.max(np.abs(eigvals))))
    # rounding noise around a zero eigenvalue
    eigvals = np.where(np.abs(eigvals) <= 8.0 * _EPS * scale, 0.0, eigvals)
    g_tol = _HARD_CASE_TOL * (1.0 + float(np.linalg.norm(g)))
    g_hat = V.T @ g
    g_hat = np.where(np.abs(g_hat) <= g_tol, 0.0, g_hat)
    lam1 = float(eigvals[0])
    lam_low = max(0.0, -lam1)
    lead = eigvals <= lam1 + 1e-12 * scale

    hard_candidate = lam1 < 0 and not np.any(g_hat[lead])
    g_eff = g_hat.copy()
    if hard_candidate:
        g_eff[lead] = 0.0
    if not np.any(g_eff) and lam1 >= 0:
        return np.zeros(n)

    nonzero = g_eff != 0.0

    def s_of(lam: float) -> np.ndarray:
        out = np.zeros(n)
        with np.errstate(divide="ignore", invalid="ignore"):
            out[nonzero] = -g_eff[nonzero] / (eigvals[nonzero] + lam)
        return out

    def phi(lam: float) -> float:
        return float(np.linalg.norm(s_of(lam))) - 2.0 * lam / sigma

    def hard_case_step() -> np.ndarray:
        g_eff[lead] = 0.0
        nonzero[lead] = False
        base = s_of(lam_low)
        radius = 2.0 * lam_low / sigma
        tau = np.sqrt(max(radius ** 2 - float(base @ base), 0.0))
        first = int(np.argmax(lead))
        candidates = []
        for sign in (1.0, -1.0):
            s_hat = base.copy()
            s_hat[first] += sign * tau
            candidates.append(V @ s_hat)
        # any global minimizer will do; keep the choice reproducible
        return max(candidates, key=lambda c: tuple(c))

    lo = lam_low
    phi_lo = phi(lo)
    if hard_candidate and phi_lo <= 0:
        return hard_case_step()
    if not np.isfinite(phi_lo):
        step = 1e-15 * max(1.0, lam_low)
        lo = lam_low + step
        phi_lo = phi(lo)
        while not np.isfinite(phi_lo):
            step *= 2.0
            lo = lam_low + step
            phi_lo = phi(lo)
        if phi_lo <= 0:
            if lam1 < 0:
                logger.debug("near hard case: leading gradient component treated as zero")
                return hard_case_step()
            return V @ s_of(lo)
    if phi_lo == 0:
        return V @ s_of(lo)

    hi = max(2.0 * lo, lo + 1.0)
    while phi(hi) > 0:
        hi = lo + 2.0 * (hi - lo)
    lam = brentq(phi, lo, hi, xtol=1e-300, rtol=4.0 * _EPS, maxiter=500)
    return V @ s_of(lam)


def _negative_curvature_kick(m: CubicModel, y: np.ndarray) -> Optional[np.ndarray]:
    """Move off a stationary point that fails the curvature certificate."""
    hess = m.B + m.composite.hessian(y)
    eigvals, V = eigh(0.5 * (hess + hess.T))
    if eigvals[0] >= 0:
        return None
    length = 2.0 * abs(float(eigvals[0])) / m.sigma
    best, best_value = None, np.inf
    for sign in (1.0, -1.0):
        trial = m.composite.prox(y + sign * length * V[:, 0], 1.0)
        value = model_increment(m, trial) + m.composite.value(trial)
        if value < best_value:
            best, best_value = trial, value
    return best


def _solve_spectral(m: CubicModel, opts: SolveOptions) -> SubproblemSolution:
    y = m.center + _spectral_step(m.g, m.B, m.sigma)
    solution, accepted = _certify(m, y, np.zeros_like(y), opts, "spectral", 1)
    if not accepted:
        raise SubproblemStalled(
            f"spectral solution failed its certificate (residual {solution.grad_residual:.3e}, "
            f"r {solution.r:.3e})")
    return solution


def _solve_bfgs(m: CubicModel, opts: SolveOptions) -> SubproblemSolution:
    """BFGS with Armijo backtracking on the model, started at the center."""
    n = m.center.size
    identity = np.eye(n)
    H = identity.copy()
    y = m.center.copy()
    grad = m.g.copy()
    value = 0.0
    zero = np.zeros(n)
    kicks = 0
    for it in range(opts.max_inner_iters):
        solution, accepted = _certify(m, y, zero, opts, "bfgs", it)
        if accepted:
            return solution
        if solution.grad_residual <= _CENTER_TOL * (1.0 + float(np.linalg.norm(m.g))):
            # first-order stationary but not certified: only curvature can help
            kicked = _negative_curvature_kick(m, y) if kicks < _MAX_KICKS else None
            if kicked is None:
                break
            kicks += 1
            y, grad, value, H = kicked, model_gradient(m, kicked), model_increment(m, kicked), identity.copy()
            continue

        direction = -H @ grad
        slope = float(grad @ direction)
        if slope >= 0:
            H = identity.copy()
            direction = -grad
            slope = -float(grad @ grad)

        t = 1.0
        while True:
            y_new = y + t * direction
            value_new = model_increment(m, y_new)
            if value_new <= value + opts.armijo_c * t * slope:
                break
            t *= opts.backtrack
            if t < 1e-20:
                raise SubproblemStalled("BFGS line search failed")

        grad_new = model_gradient(m, y_new)
        s_k = y_new - y
        y_k = grad_new - grad
        sy = float(s_k @ y_k)
        if sy > 1e-12 * float(np.linalg.norm(s_k) * np.linalg.norm(y_k)):
            if it == 0:
                H = (sy / float(y_k @ y_k)) * identity
            rho = 1.0 / sy
            left = identity - rho * np.outer(s_k, y_k)
            H = left @ H @ left.T + rho * np.outer(s_k, s_k)
        y, grad, value = y_new, grad_new, value_new

    solution, accepted = _certify(m, y, zero, opts, "bfgs", opts.max_inner_iters)
    if accepted:
        return solution
    raise SubproblemStalled(
        f"BFGS reached {opts.max_inner_iters} iterations without certificate "
        f"(residual {solution.grad_residual:.3e}, r {solution.r:.3e})")


def _solve_prox_grad(m: CubicModel, opts: SolveOptions) -> SubproblemSolution:
    """Monotone proximal gradient with backtracking, started at the center."""
    psi = m.composite
    y = m.center.copy()
    t = 1.0 / (float(np.linalg.norm(m.B, 2)) + 1.0)
    prox_sub: Optional[np.ndarray] = None
    kicks = 0
    for it in range(opts.max_inner_iters):
        grad = model_gradient(m, y)
        psi_sub = psi.closest_subgradient(y, grad)
        if psi_sub is None:
            psi_sub = prox_sub
        if psi_sub is not None:
            solution, accepted = _certify(m, y, psi_sub, opts, "prox_grad", it)
            if accepted:
                return solution
            stationary = solution.grad_residual <= _CENTER_TOL * (1.0 + float(np.linalg.norm(m.g)))
            if stationary and opts.require_second_order and kicks < _MAX_KICKS:
                kicked = _negative_curvature_kick(m, y)
                if kicked is not None:
                    kicks += 1
                    y, prox_sub = kicked, None
                    continue

        value = model_increment(m, y)
        while True:
            z = psi.prox(y - t * grad, t)
            d = z - y
            if model_increment(m, z) <= value + float(grad @ d) + float(d @ d) / (2.0 * t):
                break
            t *= opts.backtrack
            if t < 1e-20:
                raise SubproblemStalled("proximal gradient backtracking failed")
        prox_sub = (y - t * grad - z) / t
        y = z
        t /= opts.backtrack

    grad = model_gradient(m, y)
    psi_sub = psi.closest_subgradient(y, grad)
    if psi_sub is None:
        psi_sub = prox_sub if prox_sub is not None else np.zeros_like(y)
    solution, accepted = _certify(m, y, psi_sub, opts, "prox_grad", opts.max_inner_iters)
    if accepted:
        return solution
    raise SubproblemStalled(
        f"proximal gradient reached {opts.max_inner_iters} iterations without certificate "
        f"(residual {solution.grad_residual:.3e}, r {solution.r:.3e})")


def solve_subproblem(m: CubicModel, opts: Optional[SolveOptions] = None) -> SubproblemSolution:
    """Approximately minimize M_{x,sigma} + psi and certify the result."""
    opts = opts or SolveOptions()
    _validate(m)
    kind = m.composite.kind
    method = opts.method

    if method is SolverMethod.PROX_GRAD:
        if not m.composite.has_prox:
            raise UnsupportedComposite("custom composite has no prox operator")
        return _solve_prox_grad(m, opts)
    if method in (SolverMethod.SPECTRAL, SolverMethod.BFGS) and kind is not CompositeKind.ZERO:
        raise UnsupportedComposite(f"{method.value} solver needs a zero composite, got {kind.value}")
    if method is SolverMethod.BFGS:
        return _solve_bfgs(m, opts)
    if kind is CompositeKind.ZERO:
        return _solve_spectral(m, opts)

    if kind is CompositeKind.BOX:
        y = m.center + _spectral_step(m.g, m.B, m.sigma)
        if m.composite.in_domain(y):
            psi_sub = m.composite.closest_subgradient(y, model_gradient(m, y))
            solution, accepted = _certify(m, y, psi_sub, opts, "spectral", 1)
            if accepted:
                return solution
        logger.debug("unconstrained step leaves the box, switching to proximal gradient")
    if not m.composite.has_prox:
        raise UnsupportedComposite("custom composite has no prox operator")
    return _solve_prox_grad(m, opts)
