"""
Unit tests for the integration engine
Tests closed forms, radial quadrature, seeded Monte Carlo and determinism
"""

import math
import pytest
import numpy as np

# Import project modules
import sys
import os
sys.path.append(os.path.join(os.path.dirname(__file__), '../..'))

from src.config import LabSettings
from src.engines.bodies import interval, random_origin_hpolytope, smoothed_square, whole_space_proxy
from src.engines.integrals import IntegrationEngine
from src.engines.measures import make_diag_quadratic, make_gaussian
from src.exceptions import DimensionMismatchError, InputError, PreconditionError
from src.models.body import ConvexBody
from src.models.estimate import EstimateMethod, MethodChoice, RngSpec

BOX_GAUSSIAN = math.erf(1.0 / math.sqrt(2.0)) * math.erf(2.0 / math.sqrt(2.0))


@pytest.fixture
def engine():
    """Integration engine with a small default budget"""
    return IntegrationEngine(LabSettings(default_budget=100_000, workers=2))


class TestClosedForms:
    """Test closed-form oracles"""

    def test_box_gaussian(self, engine):
        estimate = engine.closed_form_mu(make_gaussian(2), ConvexBody.box([1.0, 2.0]))
        assert estimate.method == EstimateMethod.CLOSED_FORM
        assert estimate.stderr == 0.0
        assert estimate.value == pytest.approx(BOX_GAUSSIAN, rel=1e-12)

    def test_ball_gaussian(self, engine):
        estimate = engine.closed_form_mu(make_gaussian(2), ConvexBody.ball(1.0))
        assert estimate.value == pytest.approx(1.0 - math.exp(-0.5), rel=1e-12)

    def test_interval_gaussian(self, engine):
        estimate = engine.closed_form_mu(make_gaussian(1), interval(1.0, 1.0))
        assert estimate.value == pytest.approx(math.erf(1.0 / math.sqrt(2.0)), rel=1e-12)

    def test_ellipse_has_no_closed_form(self, engine):
        assert engine.closed_form_mu(make_gaussian(2), ConvexBody.ellipsoid([2.0, 1.0])) is None

    def test_auto_prefers_closed_form(self, engine):
        estimate = engine.mu_of_body(make_gaussian(2), ConvexBody.box([1.0, 2.0]))
        assert estimate.method == EstimateMethod.CLOSED_FORM


class TestRadialQuadrature:
    """Test deterministic radial quadrature against closed forms"""

    def test_box_matches_closed_form(self, engine):
        estimate = engine.mu_of_body(make_gaussian(2), ConvexBody.box([1.0, 2.0]), method=MethodChoice.RADIAL)
        assert estimate.method == EstimateMethod.RADIAL_QUADRATURE
        assert estimate.stderr == 0.0
        assert estimate.value == pytest.approx(BOX_GAUSSIAN, abs=1e-7)

    def test_ball_matches_closed_form(self, engine):
        estimate = engine.mu_of_body(make_gaussian(2), ConvexBody.ball(2.0), method=MethodChoice.RADIAL)
        assert estimate.value == pytest.approx(1.0 - math.exp(-2.0), abs=1e-10)

    def test_diag_quadratic_box(self, engine):
        """Anisotropic quadratic on the unit square"""
        P = make_diag_quadratic([1.0, 4.0])
        expected = math.erf(1.0 / math.sqrt(2.0)) * math.erf(math.sqrt(2.0))
        estimate = engine.mu_of_body(P, ConvexBody.box([1.0, 1.0]), method=MethodChoice.RADIAL)
        assert estimate.value == pytest.approx(expected, abs=1e-7)

    def test_second_moment_on_disc(self, engine):
        """∫_{B(1)}|x|²dγ = 2 − 3e^{−1/2}"""
        estimate = engine.moment(
            make_gaussian(2), ConvexBody.ball(1.0), lambda x: np.sum(x**2, axis=1), method=MethodChoice.RADIAL
        )
        assert estimate.value == pytest.approx(2.0 - 3.0 * math.exp(-0.5), abs=1e-9)

    def test_normalized_integral_on_proxy(self, engine):
        """∫ 1/(|x|²+2) dγ over the plane is about 0.298"""
        estimate = engine.moment(
            make_gaussian(2), whole_space_proxy(2), lambda x: 1.0 / (np.sum(x**2, axis=1) + 2.0),
            method=MethodChoice.RADIAL,
        )
        assert estimate.value == pytest.approx(0.5 * math.e * 0.21938393439552062, abs=1e-6)
        assert abs(estimate.value - 0.298) <= 0.002

    def test_smoothed_square_between_square_and_box(self, engine):
        """Monotonicity under inclusion"""
        inner = engine.mu_of_body(make_gaussian(2), ConvexBody.box([1.0, 1.0]))
        outer = engine.mu_of_body(make_gaussian(2), ConvexBody.box([1.1, 1.1]))
        middle = engine.mu_of_body(make_gaussian(2), smoothed_square(0.1), method=MethodChoice.RADIAL)
        assert inner.value < middle.value < outer.value

    def test_radial_requires_origin(self, engine):
        K = ConvexBody.hpolytope([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]], [2.0, -1.0, 1.0, 1.0])
        with pytest.raises(PreconditionError):
            engine.mu_of_body(make_gaussian(2), K, method=MethodChoice.RADIAL)

    def test_radial_limited_to_plane(self, engine):
        with pytest.raises(InputError):
            engine.mu_of_body(make_gaussian(3), ConvexBody.ellipsoid([1.0, 2.0, 3.0]), method=MethodChoice.RADIAL)


class TestMonteCarlo:
    """Test seeded Monte Carlo estimation"""

    def test_mc_agrees_with_closed_form(self, engine):
        estimate = engine.mu_of_body(
            make_gaussian(2), ConvexBody.box([1.0, 2.0]), method=MethodChoice.MC, rng=RngSpec(seed=11)
        )
        assert estimate.method == EstimateMethod.MC
        assert estimate.stderr > 0
        assert abs(estimate.value - BOX_GAUSSIAN) <= 5.0 * estimate.stderr

    def test_mc_importance_weights_for_diag(self, engine):
        P = make_diag_quadratic([1.0, 4.0])
        expected = math.erf(1.0 / math.sqrt(2.0)) * math.erf(math.sqrt(2.0))
        estimate = engine.mu_of_body(P, ConvexBody.box([1.0, 1.0]), method=MethodChoice.MC, rng=RngSpec(seed=2))
        assert abs(estimate.value - expected) <= 5.0 * estimate.stderr

    def test_same_seed_same_result(self, engine):
        K = random_origin_hpolytope(np.random.default_rng(0), 3)
        a = engine.mu_of_body(make_gaussian(3), K, rng=RngSpec(seed=5))
        b = engine.mu_of_body(make_gaussian(3), K, rng=RngSpec(seed=5))
        assert a.value == b.value
        assert a.stderr == b.stderr

    def test_bit_identical_across_worker_counts(self):
        """Chunked reduction does not depend on thread count"""
        K = ConvexBody.ellipsoid([1.0, 2.0, 0.5])
        results = []
        for workers in (1, 3, 8):
            engine = IntegrationEngine(LabSettings(default_budget=50_000, workers=workers, chunk_size=4096))
            results.append(engine.mu_of_body(make_gaussian(3), K, method=MethodChoice.MC, rng=RngSpec(seed=9)))
        assert len({(r.value, r.stderr) for r in results}) == 1

    def test_different_streams_differ(self, engine):
        K = ConvexBody.box([1.0, 1.0])
        rng = RngSpec(seed=1)
        a = engine.mu_of_body(make_gaussian(2), K, method=MethodChoice.MC, rng=rng.child(0))
        b = engine.mu_of_body(make_gaussian(2), K, method=MethodChoice.MC, rng=rng.child(1))
        assert a.value != b.value

    def test_moment_vector_covariance(self, engine):
        vector = engine.moment_vector(
            make_gaussian(3), ConvexBody.ball(1.5, dim=3), [None, lambda x: np.sum(x**2, axis=1)],
            rng=RngSpec(seed=3),
        )
        assert vector.covariance.shape == (2, 2)
        assert vector.covariance[0, 1] > 0
        assert vector.component(1).value < 3.0 * vector.component(0).value


class TestValidation:
    """Test input validation"""

    def test_dimension_mismatch(self, engine):
        with pytest.raises(DimensionMismatchError):
            engine.mu_of_body(make_gaussian(3), ConvexBody.ball(1.0))

    def test_budget_too_small(self, engine):
        with pytest.raises(InputError):
            engine.mu_of_body(make_gaussian(2), ConvexBody.ball(1.0), method=MethodChoice.MC, budget=10)

    def test_capability_metrics_recorded(self, engine):
        engine.mu_of_body(make_gaussian(2), ConvexBody.ball(1.0))
        info = engine.get_status_info()
        assert info["metrics"]["per_capability"]["mu_of_body"] == 1
        assert "moment" in info["capabilities"]
