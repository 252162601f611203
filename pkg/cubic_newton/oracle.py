"""
Oracle module for the cubic Newton library.
Contains the counted zeroth/first-order oracles, the stationarity residual
and the second-order stationarity diagnostic.
"""
import logging
from typing import Optional

import numpy as np
from scipy.linalg import eigvalsh

from .errors import DimensionMismatch, NoGradientOracle, NoHessianOracle, NonFiniteValue
from .models import OracleCounter, ProblemInstance

# Setup logging
logger = logging.getLogger(__name__)


def _as_point(p: ProblemInstance, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (p.dim,):
        raise DimensionMismatch(f"expected a point of shape ({p.dim},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteValue(f"oracle queried at a non-finite point on '{p.name}'")
    return x


def counted_value(p: ProblemInstance, c: OracleCounter, x) -> float:
    """f(x), charged as one function evaluation."""
    x = _as_point(p, x)
    c.charge_value()
    value = float(p.smooth_value(x))
    if not np.isfinite(value):
        logger.warning(f"❌ f returned {value} on '{p.name}'")
        raise NonFiniteValue(f"f(x) = {value} on '{p.name}'")
    return value


def counted_gradient(p: ProblemInstance, c: OracleCounter, x) -> np.ndarray:
    """grad f(x), charged as one gradient evaluation."""
    if not p.has_gradient:
        raise NoGradientOracle(f"'{p.name}' has no gradient oracle")
    x = _as_point(p, x)
    c.charge_gradient()
    grad = np.asarray(p.smooth_gradient(x), dtype=float)
    if grad.shape != (p.dim,):
        raise DimensionMismatch(f"gradient of shape {grad.shape} for dim {p.dim}")
    if not np.all(np.isfinite(grad)):
        logger.warning(f"❌ gradient is not finite on '{p.name}'")
        raise NonFiniteValue(f"non-finite gradient on '{p.name}'")
    return grad


def counted_hessian(p: ProblemInstance, c: OracleCounter, x) -> np.ndarray:
    """Analytic Hessian for diagnostics; never charged to a budget."""
    if not p.has_hessian:
        raise NoHessianOracle(f"'{p.name}' has no Hessian oracle")
    x = _as_point(p, x)
    c.charge_hessian()
    return _checked_hessian(p, x)


def _checked_hessian(p: ProblemInstance, x: np.ndarray) -> np.ndarray:
    hess = np.asarray(p.smooth_hessian(x), dtype=float)
    if hess.shape != (p.dim, p.dim):
        raise DimensionMismatch(f"Hessian of shape {hess.shape} for dim {p.dim}")
    if not np.all(np.isfinite(hess)):
        raise NonFiniteValue(f"non-finite Hessian on '{p.name}'")
    return hess


def objective_value(p: ProblemInstance, c: OracleCounter, x) -> float:
    """F(x) = f(x) + psi(x); psi is free, f is counted."""
    x = _as_point(p, x)
    return counted_value(p, c, x) + p.composite_value(x)


def stationarity_residual(p: ProblemInstance, grad, psi_sub) -> float:
    """||grad f(x) + psi'(x)|| for a certified subgradient psi'(x)."""
    grad = np.asarray(grad, dtype=float)
    psi_sub = np.asarray(psi_sub, dtype=float)
    if grad.shape != (p.dim,) or psi_sub.shape != (p.dim,):
        raise DimensionMismatch(
            f"grad {grad.shape} and psi_sub {psi_sub.shape} must both be ({p.dim},)")
    return float(np.linalg.norm(grad + psi_sub))


def xi_measure(p: ProblemInstance, x, c: Optional[OracleCounter] = None) -> float:
    """xi(x) = max{-lambda_min(hess f(x) + hess psi(x)), 0}."""
    if not p.has_hessian:
        raise NoHessianOracle(f"'{p.name}' has no Hessian oracle")
    x = _as_point(p, x)
    if c is not None:
        hess = counted_hessian(p, c, x)
    else:
        hess = _checked_hessian(p, x)
    if not p.composite.is_zero:
        hess = hess + p.composite.hessian(x)
    lam_min = eigvalsh(0.5 * (hess + hess.T), subset_by_index=[0, 0])[0]
    return max(-float(lam_min), 0.0)
