"""
Finite difference module for the cubic Newton library.
Contains the Hessian and gradient estimators built from counted oracle calls.

Base evaluations (grad f(x) or f(x)) are cached within one call only.
"""
import logging

import numpy as np

from .models import ApproxSource, OracleCounter, ProblemInstance, SymmetricMatrixApprox
from .oracle import counted_gradient, counted_hessian, counted_value

# Setup logging
logger = logging.getLogger(__name__)


def _check_step(label: str, h: float):
    if not np.isfinite(h) or h <= 0:
        raise ValueError(f"{label} must be positive and finite, got {h}")


def fo_hessian_approx(p: ProblemInstance, c: OracleCounter, x, h: float) -> SymmetricMatrixApprox:
    """Forward differences of the gradient; n + 1 gradient calls."""
    _check_step("h", h)
    x = np.asarray(x, dtype=float)
    n = p.dim
    g0 = counted_gradient(p, c, x)
    A = np.empty((n, n))
    for j in range(n):
        shifted = x.copy()
        shifted[j] += h
        A[:, j] = (counted_gradient(p, c, shifted) - g0) / h
    B = 0.5 * (A + A.T)
    return SymmetricMatrixApprox(B=B, source=ApproxSource.FO_FROM_GRADIENTS,
                                 h_used=h, base_gradient=g0)


def zo_gradient_approx(p: ProblemInstance, c: OracleCounter, x, h_g: float) -> np.ndarray:
    """Central differences of f; 2n function calls."""
    _check_step("h_g", h_g)
    x = np.asarray(x, dtype=float)
    g = np.empty(p.dim)
    for i in range(p.dim):
        forward = x.copy()
        forward[i] += h_g
        backward = x.copy()
        backward[i] -= h_g
        g[i] = (counted_value(p, c, forward) - counted_value(p, c, backward)) / (2.0 * h_g)
    return g


def zo_hessian_approx(p: ProblemInstance, c: OracleCounter, x, h: float) -> SymmetricMatrixApprox:
    """Second differences of f; n(n+1)/2 + n + 1 function calls.

    A_ij = (f(x + h e_i + h e_j) - f(x + h e_i) - f(x + h e_j) + f(x)) / h^2,
    evaluated on the upper triangle only.
    """
    _check_step("h", h)
    x = np.asarray(x, dtype=float)
    n = p.dim
    f0 = counted_value(p, c, x)
    f_single = np.empty(n)
    for i in range(n):
        shifted = x.copy()
        shifted[i] += h
        f_single[i] = counted_value(p, c, shifted)

    A = np.empty((n, n))
    h2 = h * h
    for i in range(n):
        for j in range(i, n):
            shifted = x.copy()
            shifted[i] += h
            shifted[j] += h
            A[i, j] = (counted_value(p, c, shifted) - f_single[i] - f_single[j] + f0) / h2
            A[j, i] = A[i, j]
    B = 0.5 * (A + A.T)
    return SymmetricMatrixApprox(B=B, source=ApproxSource.ZO_FROM_VALUES,
                                 h_used=h, base_value=f0)


def analytic_hessian_approx(p: ProblemInstance, c: OracleCounter, x) -> SymmetricMatrixApprox:
    """Exact Hessian wrapped as an approximation (diagnostics and tests)."""
    H = counted_hessian(p, c, x)
    return SymmetricMatrixApprox(B=0.5 * (H + H.T), source=ApproxSource.ANALYTIC)
