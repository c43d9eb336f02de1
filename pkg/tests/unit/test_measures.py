"""
Unit tests for log-concave potentials
Tests factories, declared curvature bounds and oracle consistency
"""

import math
import pytest
import numpy as np

# Import project modules
import sys
import os
sys.path.append(os.path.join(os.path.dirname(__file__), '../..'))

from src.engines.measures import (
    check_bounds,
    check_oracles,
    make_custom,
    make_diag_quadratic,
    make_gaussian,
    sample_points,
)
from src.exceptions import InputError
from src.models.potential import OracleReport, PotentialKind


class TestPotentialFactories:
    """Test potential construction"""

    def test_gaussian(self):
        P = make_gaussian(3)
        assert P.kind == PotentialKind.GAUSSIAN
        assert P.k1 == 1.0 and P.k2 == 1.0
        assert P.ratio == pytest.approx(1.0)
        assert P.is_even
        assert P.value_at([1.0, 2.0, 2.0]) == pytest.approx(4.5)

    def test_gaussian_rejects_zero_dimension(self):
        with pytest.raises(InputError):
            make_gaussian(0)

    def test_diag_quadratic_constants(self):
        """k₁ = min cᵢ, k₂ = mean cᵢ, R = k₂/k₁"""
        P = make_diag_quadratic([1.0, 4.0])
        assert P.k1 == pytest.approx(1.0)
        assert P.k2 == pytest.approx(2.5)
        assert P.ratio == pytest.approx(2.5)
        np.testing.assert_allclose(P.gradient_at([1.0, 1.0]), [1.0, 4.0])

    @pytest.mark.parametrize("coefficients", [[], [1.0, 0.0], [1.0, -2.0], [1.0, float("inf")]])
    def test_diag_quadratic_rejects_bad_coefficients(self, coefficients):
        with pytest.raises(InputError):
            make_diag_quadratic(coefficients)

    def test_custom_requires_all_oracles(self):
        with pytest.raises(InputError):
            make_custom(2, eval=lambda x: x, grad=None, hess=lambda x: x, k1=1.0, k2=1.0)

    def test_k2_below_k1_rejected(self):
        """Declared constants must satisfy k₂ ≥ k₁"""
        with pytest.raises(ValueError):
            make_custom(
                1, eval=lambda x: 0.5 * x[:, 0] ** 2, grad=lambda x: x,
                hess=lambda x: np.ones((x.shape[0], 1, 1)), k1=2.0, k2=1.0,
            )


class TestCurvatureBounds:
    """Test spot checks of declared curvature"""

    def test_gaussian_bounds_hold(self):
        report = check_bounds(make_gaussian(2), sample_points(2, count=50))
        assert report.passed
        assert report.min_eigenvalue == pytest.approx(1.0)

    def test_overstated_k1_is_reported(self):
        """Declared k₁ larger than the true Hessian is flagged"""
        P = make_custom(
            2,
            eval=lambda x: 0.5 * np.sum(x**2, axis=1),
            grad=lambda x: np.array(x, dtype=float),
            hess=lambda x: np.broadcast_to(np.eye(2), (x.shape[0], 2, 2)).copy(),
            k1=2.0,
            k2=2.0,
        )
        report = check_bounds(P, sample_points(2, count=10))
        assert not report.passed
        assert report.violated_bound == "k1"
        assert report.worst_point is not None


class TestOracles:
    """Test finite-difference consistency of oracles"""

    def test_diag_quadratic_oracles_consistent(self):
        result = check_oracles(make_diag_quadratic([1.0, 3.0]), sample_points(2, count=20, seed=4))
        assert isinstance(result, OracleReport)
        assert result.passed
        assert result.grad_error < 1e-6
        assert result.points_checked == 20
        assert result.to_dict()["hess_error"] == result.hess_error

    def test_inconsistent_gradient_detected(self):
        P = make_custom(
            2,
            eval=lambda x: 0.5 * np.sum(x**2, axis=1),
            grad=lambda x: 2.0 * np.array(x, dtype=float),
            hess=lambda x: np.broadcast_to(np.eye(2), (x.shape[0], 2, 2)).copy(),
            k1=1.0,
            k2=1.0,
        )
        result = check_oracles(P, sample_points(2, count=20))
        assert not result.passed
        assert result.grad_error > 1e-3

    def test_normalizer(self):
        """Gaussian normalizer (2π)^{n/2}"""
        assert make_gaussian(2).normalizer() == pytest.approx(2.0 * math.pi)
