"""
Tests for the benchmark problem catalog.
To run these tests:
    pytest -xvs tests/test_problems.py
"""
import numpy as np
import pytest

from cubic_newton.errors import UnknownProblem
from cubic_newton.models import CompositeDescriptor, CompositeKind
from benchmark.problems import (catalog, catalog_names, derivative_error, get_entry, saddle_problem,
                                synthetic_known_constants, with_composite, xi_measure)


def _hessian_gap(entry, x, h=1e-5):
    """Relative gap between the analytic Hessian and central differences of the gradient."""
    p = entry.build()
    H = p.smooth_hessian(x)
    numeric = np.empty_like(H)
    for j in range(entry.dim):
        step = h * max(1.0, abs(x[j]))
        e = np.zeros(entry.dim)
        e[j] = step
        numeric[:, j] = (p.smooth_gradient(x + e) - p.smooth_gradient(x - e)) / (2.0 * step)
    return np.linalg.norm(H - numeric) / max(1.0, np.linalg.norm(H))


class TestCatalog:
    """Tests for the catalog entries."""

    def test_catalog_size_and_order(self):
        """Test the fixed catalog order."""
        names = catalog_names()
        assert len(names) == 12
        assert names[0] == "rosenbrock"
        assert len(set(names)) == len(names)

    @pytest.mark.parametrize("name,value", [
        ("rosenbrock", 24.2),
        ("beale", 14.203125),
        ("helical_valley", 2500.0),
        ("powell_singular", 215.0),
        ("wood", 19192.0),
    ])
    def test_values_at_standard_start(self, name, value):
        """Test published objective values at the standard starting points."""
        entry = get_entry(name)
        assert entry.build().smooth_value(entry.start) == pytest.approx(value)

    def test_rosenbrock_minimum(self):
        """Test f(1, 1) = 0 with a vanishing gradient."""
        p = get_entry("rosenbrock").build()
        assert p.smooth_value(np.ones(2)) == 0.0
        assert np.allclose(p.smooth_gradient(np.ones(2)), 0.0)

    @pytest.mark.parametrize("name", catalog_names())
    def test_gradients_match_values(self, name):
        """Test analytic gradients against central differences of f."""
        assert derivative_error(get_entry(name)) < 1e-5

    @pytest.mark.parametrize("name", catalog_names())
    def test_hessians_match_gradients(self, name):
        """Test analytic Hessians against central differences of the gradient."""
        entry = get_entry(name)
        rng = np.random.default_rng(1)
        points = [entry.start] + [entry.start + 0.1 * rng.standard_normal(entry.dim) for _ in range(2)]
        for x in points:
            assert _hessian_gap(entry, x) < 1e-4
            H = entry.build().smooth_hessian(x)
            assert np.array_equal(H, H.T)

    def test_start_is_a_copy(self):
        """Test that mutating a start does not change the catalog."""
        entry = get_entry("wood")
        x = entry.start
        x[0] = 100.0
        assert entry.start[0] == -3.0


class TestLookup:
    """Tests for name resolution."""

    def test_case_insensitive(self):
        """Test that lookups ignore case and surrounding space."""
        assert get_entry("  Rosenbrock ").name == "rosenbrock"

    def test_unknown_problem(self):
        """Test that unknown names raise UnknownProblem."""
        with pytest.raises(UnknownProblem):
            get_entry("nosuch")

    def test_synthetic_names(self):
        """Test synthetic lookups with and without a dimension."""
        assert get_entry("synthetic").dim == 10
        entry = get_entry("synthetic3", seed=4)
        assert entry.dim == 3
        assert entry.name == "synthetic_s4_n3"

    def test_saddle(self):
        """Test the saddle lookup and its box."""
        entry = get_entry("saddle")
        p = entry.build()
        assert p.composite.kind is CompositeKind.BOX
        assert xi_measure(p, np.zeros(2)) == pytest.approx(1.0)
        assert p.smooth_value(np.array([0.0, 1.0])) == pytest.approx(entry.f_at_known_min)

    def test_with_box_clips_start(self):
        """Test that wrapping in a box moves the start inside."""
        box = CompositeDescriptor.box([-1.0, -1.0], [1.0, 1.0])
        entry = with_composite(get_entry("rosenbrock"), box)
        assert entry.name == "rosenbrock+box"
        assert np.array_equal(entry.start, [-1.0, 1.0])
        assert entry.build().composite.in_domain(entry.start)

    def test_with_l1(self):
        """Test the l1 wrapper name and objective."""
        entry = with_composite(get_entry("beale"), CompositeDescriptor.l1(0.5))
        assert entry.name == "beale+l1"
        p = entry.build()
        assert p.composite_value(np.array([1.0, -2.0])) == pytest.approx(1.5)


class TestSyntheticInstances:
    """Tests for instances with known constants."""

    def test_deterministic(self):
        """Test that the same seed gives the same instance."""
        a, b = synthetic_known_constants(3, 5), synthetic_known_constants(3, 5)
        x = np.linspace(-1.0, 1.0, 5)
        assert a.build().smooth_value(x) == b.build().smooth_value(x)
        assert np.array_equal(a.start, b.start)

    def test_lipschitz_constant_is_sound(self):
        """Test ||hess f(x) - hess f(y)|| <= L ||x - y|| on sampled pairs."""
        rng = np.random.default_rng(0)
        for seed in range(5):
            p = synthetic_known_constants(seed, 4, beta=3.0).build()
            for _ in range(20):
                x, y = 3.0 * rng.standard_normal(4), 3.0 * rng.standard_normal(4)
                gap = np.linalg.norm(p.smooth_hessian(x) - p.smooth_hessian(y), 2)
                assert gap <= p.known_L * np.linalg.norm(x - y) * (1.0 + 1e-9) + 1e-12

    def test_strong_convexity(self):
        """Test that the smallest Hessian eigenvalue is at least mu."""
        p = synthetic_known_constants(2, 6, mu=0.5).build()
        for x in (np.zeros(6), np.ones(6)):
            assert np.linalg.eigvalsh(p.smooth_hessian(x))[0] >= 0.5 - 1e-12
        assert p.known_mu == pytest.approx(0.5)

    def test_indefinite(self):
        """Test that the indefinite variant has negative curvature at the origin."""
        entry = synthetic_known_constants(2, 3, indefinite=True)
        p = entry.build()
        assert p.known_mu is None
        assert entry.f_at_known_min is None
        assert xi_measure(p, np.zeros(3)) > 0.0

    def test_zero_beta_is_quadratic(self):
        """Test that beta = 0 gives L = 0."""
        p = synthetic_known_constants(0, 2, beta=0.0).build()
        assert p.known_L == 0.0

    def test_rejects_bad_parameters(self):
        """Test parameter validation."""
        with pytest.raises(ValueError):
            synthetic_known_constants(0, 0)
        with pytest.raises(ValueError):
            synthetic_known_constants(0, 2, mu=-1.0)

    def test_saddle_constants(self):
        """Test the saddle Hessian Lipschitz constant on its box."""
        entry = saddle_problem()
        p = entry.build()
        rng = np.random.default_rng(2)
        for _ in range(50):
            x, y = rng.uniform(-2.0, 2.0, 2), rng.uniform(-2.0, 2.0, 2)
            gap = np.linalg.norm(p.smooth_hessian(x) - p.smooth_hessian(y), 2)
            assert gap <= entry.known_L_on_box * np.linalg.norm(x - y) + 1e-12
