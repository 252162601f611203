"""
Tests for the finite-difference Hessian and gradient estimators.
To run these tests:
    pytest -xvs tests/test_finite_diff.py
"""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cubic_newton.errors import NonFiniteValue
from cubic_newton.finite_diff import (analytic_hessian_approx, fo_hessian_approx,
                                      zo_gradient_approx, zo_hessian_approx)
from cubic_newton.models import ApproxSource, FDInterval, OracleCounter, ProblemInstance
from benchmark.problems import synthetic_known_constants


def _quadratic_form(n, seed=0):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    A = A + A.T
    b = rng.standard_normal(n)
    p = ProblemInstance(dim=n,
                        smooth_value=lambda x: 0.5 * float(x @ A @ x) + float(b @ x),
                        smooth_gradient=lambda x: A @ x + b,
                        smooth_hessian=lambda x: A)
    return p, A


class TestCallCounts:
    """Tests for the oracle cost of each estimator."""

    def setup_method(self):
        self.n = 4
        self.p, _ = _quadratic_form(self.n)
        self.x = np.linspace(-1.0, 1.0, self.n)

    def test_fo_hessian_uses_n_plus_one_gradients(self):
        """Test the first-order estimator cost."""
        c = OracleCounter()
        approx = fo_hessian_approx(self.p, c, self.x, 1e-3)
        assert (c.f_evals, c.grad_evals) == (0, self.n + 1)
        assert approx.source is ApproxSource.FO_FROM_GRADIENTS
        assert np.allclose(approx.base_gradient, self.p.smooth_gradient(self.x))

    def test_zo_gradient_uses_two_n_values(self):
        """Test the central-difference gradient cost."""
        c = OracleCounter()
        zo_gradient_approx(self.p, c, self.x, 1e-3)
        assert (c.f_evals, c.grad_evals) == (2 * self.n, 0)

    def test_zo_hessian_cost(self):
        """Test the zeroth-order estimator cost n(n+1)/2 + n + 1."""
        c = OracleCounter()
        approx = zo_hessian_approx(self.p, c, self.x, 1e-3)
        n = self.n
        assert c.f_evals == n * (n + 1) // 2 + n + 1
        assert c.grad_evals == 0
        assert approx.base_value == pytest.approx(self.p.smooth_value(self.x))

    @pytest.mark.parametrize("h", [0.0, -1e-3, np.inf, np.nan])
    def test_invalid_interval(self, h):
        """Test that non-positive or non-finite intervals are rejected."""
        with pytest.raises(ValueError):
            fo_hessian_approx(self.p, OracleCounter(), self.x, h)

    @pytest.mark.parametrize("h,h_g", [(0.0, 1e-3), (1e-3, -1.0), (np.nan, 1e-3), (1e-3, np.inf)])
    def test_interval_pair_validation(self, h, h_g):
        """Test that FDInterval rejects non-positive or non-finite steps."""
        with pytest.raises(ValueError):
            FDInterval(h=h, h_g=h_g)

    def test_nonfinite_oracle_propagates(self):
        """Test that a NaN gradient aborts the estimate."""
        p = ProblemInstance(dim=1, smooth_value=lambda x: 0.0,
                            smooth_gradient=lambda x: np.array([np.nan]))
        with pytest.raises(NonFiniteValue):
            fo_hessian_approx(p, OracleCounter(), np.zeros(1), 1e-3)


class TestExactnessOnQuadratics:
    """Tests that the estimators are exact on quadratics up to rounding."""

    def test_fo_hessian(self):
        """Test forward gradient differences on a quadratic."""
        p, A = _quadratic_form(5, seed=3)
        B = fo_hessian_approx(p, OracleCounter(), np.ones(5), 1e-3).B
        assert np.allclose(B, A, atol=1e-8)
        assert np.array_equal(B, B.T)

    def test_zo_hessian(self):
        """Test second differences of values on a quadratic."""
        p, A = _quadratic_form(3, seed=4)
        B = zo_hessian_approx(p, OracleCounter(), np.array([0.5, -0.5, 1.0]), 1e-2).B
        assert np.allclose(B, A, atol=1e-8)
        assert np.array_equal(B, B.T)

    def test_zo_gradient(self):
        """Test central differences on a quadratic."""
        p, _ = _quadratic_form(3, seed=5)
        x = np.array([1.0, 2.0, -1.0])
        g = zo_gradient_approx(p, OracleCounter(), x, 1e-2)
        assert np.allclose(g, p.smooth_gradient(x), atol=1e-9)

    def test_analytic_wrapper(self):
        """Test the analytic pass-through charges a Hessian call only."""
        p, A = _quadratic_form(2)
        c = OracleCounter()
        approx = analytic_hessian_approx(p, c, np.zeros(2))
        assert np.allclose(approx.B, A)
        assert (c.fo_calls, c.hess_evals) == (0, 1)


class TestErrorBounds:
    """Tests of the approximation error bounds on instances with a known Lipschitz constant."""

    @settings(max_examples=200, deadline=None)
    @given(seed=st.integers(0, 10_000), n=st.sampled_from([1, 2, 5, 10]),
           h=st.sampled_from([1e-1, 1e-2, 1e-3]))
    def test_fo_hessian_bound(self, seed, n, h):
        """Test ||B - hess f(x)|| <= sqrt(n) L h / 2."""
        entry = synthetic_known_constants(seed, n)
        p = entry.build()
        x = 2.0 * np.random.default_rng(seed + 1).standard_normal(n)
        B = fo_hessian_approx(p, OracleCounter(), x, h).B
        error = np.linalg.norm(B - p.smooth_hessian(x), 2)
        assert error <= np.sqrt(n) * p.known_L * h / 2.0 * (1.0 + 1e-9) + 1e-10

    @settings(max_examples=200, deadline=None)
    @given(seed=st.integers(0, 10_000), n=st.sampled_from([1, 2, 5, 10]),
           h=st.sampled_from([1e-1, 1e-2, 1e-3]))
    def test_zo_gradient_bound(self, seed, n, h):
        """Test ||g - grad f(x)|| <= sqrt(n) L h^2 / 6."""
        p = synthetic_known_constants(seed, n).build()
        x = 2.0 * np.random.default_rng(seed + 1).standard_normal(n)
        g = zo_gradient_approx(p, OracleCounter(), x, h)
        error = np.linalg.norm(g - p.smooth_gradient(x))
        assert error <= np.sqrt(n) * p.known_L * h * h / 6.0 * (1.0 + 1e-9) + 1e-9

    @settings(max_examples=200, deadline=None)
    @given(seed=st.integers(0, 10_000), n=st.sampled_from([1, 2, 5, 10]),
           h=st.sampled_from([1e-1, 1e-2, 1e-3]))
    def test_zo_hessian_bound(self, seed, n, h):
        """Test ||B - hess f(x)|| <= n (5/3) L h."""
        p = synthetic_known_constants(seed, n).build()
        x = 2.0 * np.random.default_rng(seed + 1).standard_normal(n)
        B = zo_hessian_approx(p, OracleCounter(), x, h).B
        error = np.linalg.norm(B - p.smooth_hessian(x), 2)
        assert error <= n * (5.0 / 3.0) * p.known_L * h * (1.0 + 1e-9) + 1e-6
