"""
Tests for the performance-profile computation.
To run these tests:
    pytest -xvs tests/test_profile.py
"""
import logging

import numpy as np
import pytest

from cubic_newton.errors import EmptyInput
from benchmark.profile import PROFILE_GRID, performance_profile


class TestPerformanceProfile:
    """Tests for ratios, curves and exclusions."""

    def test_two_variants(self):
        """Test counts {100, 200}: the faster variant has ratio 1, the other ratio 2."""
        table = performance_profile({("p", "a"): 100, ("p", "b"): 200})
        assert table.ratios[("p", "a")] == 1.0
        assert table.ratios[("p", "b")] == 2.0
        assert table.curve_at("a", 0.0) == 1.0
        assert table.curve_at("b", 0.0) == 0.0
        assert table.curve_at("b", 1.0) == 1.0

    def test_curve_on_grid(self):
        """Test the tabulated curve against the grid."""
        table = performance_profile({("p", "a"): 100, ("p", "b"): 200})
        grid = table.grid
        assert np.array_equal(grid, PROFILE_GRID)
        assert len(grid) == 201
        assert table.curve["b"][0] == 0.0
        assert table.curve["b"][np.searchsorted(grid, 1.0)] == 1.0

    def test_equal_counts(self):
        """Test that ties give every tied variant ratio 1."""
        table = performance_profile({("p", "a"): 7, ("p", "b"): 7})
        assert table.ratios[("p", "a")] == table.ratios[("p", "b")] == 1.0

    def test_unfinished_run(self):
        """Test that a missing count is treated as not finished."""
        counts = {("p", "a"): 10, ("p", "b"): None, ("q", "a"): 40, ("q", "b"): 20}
        table = performance_profile(counts)
        assert table.ratios[("p", "b")] == np.inf
        assert table.curve_at("b", 10.0) == 0.5
        assert table.curve_at("a", 1.0) == 1.0

    def test_curves_are_monotone(self):
        """Test that every curve is nondecreasing and within [0, 1]."""
        rng = np.random.default_rng(0)
        counts = {(f"p{i}", v): int(rng.integers(1, 1000)) for i in range(8) for v in ("a", "b", "c")}
        table = performance_profile(counts)
        for curve in table.curve.values():
            assert np.all(np.diff(curve) >= 0)
            assert curve[0] >= 0.0 and curve[-1] <= 1.0

    def test_problem_without_finisher_is_dropped(self, caplog):
        """Test that a problem nobody finished is excluded with a warning."""
        counts = {("p", "a"): 10, ("p", "b"): 20, ("q", "a"): None, ("q", "b"): None}
        with caplog.at_level(logging.WARNING):
            table = performance_profile(counts)
        assert table.problems == ["p"]
        assert table.excluded == ["q"]
        assert "q" in caplog.text

    def test_nothing_finished(self):
        """Test that an all-unfinished input raises EmptyInput."""
        with pytest.raises(EmptyInput):
            performance_profile({("p", "a"): None})

    def test_empty_input(self):
        """Test that no counts at all raises EmptyInput."""
        with pytest.raises(EmptyInput):
            performance_profile({})

    def test_non_positive_count(self):
        """Test that zero counts are rejected."""
        with pytest.raises(ValueError):
            performance_profile({("p", "a"): 0})
