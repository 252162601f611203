"""
Pytest configuration file with shared fixtures.
"""
import pytest
import os
import numpy as np
from dotenv import load_dotenv

from cubic_newton.models import CompositeDescriptor, OracleCounter, ProblemInstance

# Load environment variables for tests
@pytest.fixture(scope="session", autouse=True)
def load_env():
    """Load environment variables before running tests."""
    load_dotenv()

    if os.getenv("CNM_MAX_INNER_ITERS"):
        print("⚠️ Warning: CNM_MAX_INNER_ITERS is set; iterative subproblem caps differ from defaults.")


def make_quadratic(dim=2, scale=1.0, composite=None, name="quadratic"):
    """f(x) = scale/2 ||x||^2 with exact derivatives."""
    return ProblemInstance(
        dim=dim,
        smooth_value=lambda x: 0.5 * scale * float(x @ x),
        smooth_gradient=lambda x: scale * x,
        smooth_hessian=lambda x: scale * np.eye(dim),
        composite=composite or CompositeDescriptor.zero(),
        known_L=0.0,
        lower_bound_hint=0.0,
        name=name,
    )


def make_double_well(name="double_well"):
    """f(x) = x^4/4 - x^2/2 in one dimension."""
    return ProblemInstance(
        dim=1,
        smooth_value=lambda x: 0.25 * float(x[0]) ** 4 - 0.5 * float(x[0]) ** 2,
        smooth_gradient=lambda x: np.array([x[0] ** 3 - x[0]]),
        smooth_hessian=lambda x: np.array([[3.0 * x[0] ** 2 - 1.0]]),
        name=name,
    )


@pytest.fixture
def quadratic():
    """Two-dimensional f = ||x||^2 / 2."""
    return make_quadratic()


@pytest.fixture
def double_well():
    """One-dimensional double well with a local maximum at 0."""
    return make_double_well()


@pytest.fixture
def counter():
    """Unbudgeted first-order counter."""
    return OracleCounter()
