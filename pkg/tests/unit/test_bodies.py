"""
Unit tests for convex body geometry
Tests support/radial queries, Minkowski combinations, boundary curves and body factories
"""

import math
import pytest
import numpy as np
from hypothesis import given, settings, strategies as st

# Import project modules
import sys
import os
sys.path.append(os.path.join(os.path.dirname(__file__), '../..'))

from src.engines.bodies import (
    boundary_curve_2d,
    contains,
    dilate,
    edge_lengths,
    family_member,
    harmonic_body,
    interval,
    minkowski_comb,
    minkowski_sum,
    polygon_vertices,
    radial,
    random_fan_pair,
    random_harmonic_body,
    random_origin_hpolytope,
    random_symmetric_hpolytope,
    smoothed_square,
    square,
    support,
    support_values,
    validate_family,
    whole_space_proxy,
)
from src.exceptions import (
    DimensionMismatchError,
    FamilyInvalidError,
    InputError,
    NotC2PlusError,
    PreconditionError,
)
from src.models.body import BodyFamily, BodyKind, ConvexBody, DirectionGrid, Perturbation
from src.models.curve import CurveKind


class TestSupportFunction:
    """Test support function evaluation across representations"""

    def test_ball_support_is_radius(self):
        """Ball support is constant"""
        K = ConvexBody.ball(1.5)
        assert support(K, [1.0, 0.0]) == pytest.approx(1.5)
        assert support(K, [0.6, -0.8]) == pytest.approx(1.5)

    def test_box_support(self):
        """Box support is Σ aᵢ|uᵢ|"""
        K = ConvexBody.box([1.0, 2.0])
        u = [1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0)]
        assert support(K, u) == pytest.approx(3.0 / math.sqrt(2.0))

    def test_ellipse_support(self):
        """Ellipse support is sqrt(Σ aᵢ²uᵢ²)"""
        K = ConvexBody.ellipsoid([2.0, 1.0])
        assert support(K, [1.0, 0.0]) == pytest.approx(2.0)
        assert support(K, [0.0, 1.0]) == pytest.approx(1.0)

    def test_hpolytope_matches_box(self):
        """Square as H-polytope agrees with the box primitive"""
        box = ConvexBody.box([1.0, 1.0])
        sq = square(1.0)
        for angle in np.linspace(0.0, 2.0 * np.pi, 13):
            u = [math.cos(angle), math.sin(angle)]
            assert support(sq, u) == pytest.approx(support(box, u), abs=1e-10)

    def test_non_unit_direction_rejected(self):
        """Directions must be unit vectors"""
        with pytest.raises(InputError):
            support(ConvexBody.ball(1.0), [1.0, 1.0])

    def test_dimension_mismatch(self):
        """Direction dimension must match the body"""
        with pytest.raises(DimensionMismatchError):
            support(ConvexBody.ball(1.0, dim=3), [1.0, 0.0])

    def test_support_grid_exact_on_grid(self):
        """SupportGrid returns stored values at grid directions"""
        grid = DirectionGrid.circle(64)
        K = ConvexBody.support_grid(grid, np.full(64, 2.0))
        assert support(K, grid.directions[5]) == pytest.approx(2.0)


class TestContainsAndRadial:
    """Test membership and radial function"""

    def test_contains_box(self):
        K = ConvexBody.box([1.0, 2.0])
        assert contains(K, [0.5, 1.9])
        assert not contains(K, [1.1, 0.0])

    def test_boundary_point_is_contained(self):
        """Closed set semantics"""
        assert contains(ConvexBody.ball(1.0), [1.0, 0.0])

    def test_radial_box(self):
        K = ConvexBody.box([1.0, 2.0])
        assert radial(K, [0.0, 1.0]) == pytest.approx(2.0)
        assert radial(K, [1.0, 0.0]) == pytest.approx(1.0)

    def test_radial_ellipse(self):
        K = ConvexBody.ellipsoid([2.0, 1.0])
        assert radial(K, [1.0, 0.0]) == pytest.approx(2.0)

    def test_radial_requires_origin(self):
        """Radial function is undefined when origin is outside"""
        K = ConvexBody.hpolytope([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]], [2.0, -1.0, 1.0, 1.0])
        assert not K.contains_origin
        with pytest.raises(PreconditionError):
            radial(K, [1.0, 0.0])


class TestMinkowskiOperations:
    """Test dilation and Minkowski combinations"""

    def test_dilate_ball(self):
        K = dilate(ConvexBody.ball(1.0), 2.5)
        assert K.kind == BodyKind.BALL
        assert K.radius == pytest.approx(2.5)

    def test_dilate_rejects_nonpositive(self):
        with pytest.raises(InputError):
            dilate(ConvexBody.ball(1.0), 0.0)

    def test_ball_combination_stays_ball(self):
        M = minkowski_comb(ConvexBody.ball(1.0), ConvexBody.ball(3.0), 0.25)
        assert M.kind == BodyKind.BALL
        assert M.radius == pytest.approx(2.5)

    def test_combination_endpoints(self):
        """λ=1 returns K, λ=0 returns L"""
        K, L = ConvexBody.ball(1.0), ConvexBody.box([1.0, 2.0])
        assert minkowski_comb(K, L, 1.0) is K
        assert minkowski_comb(K, L, 0.0) is L

    def test_lambda_out_of_range(self):
        with pytest.raises(InputError):
            minkowski_comb(ConvexBody.ball(1.0), ConvexBody.ball(2.0), 1.5)

    def test_common_fan_combination_is_hpolytope(self):
        """Pairs sharing a normal fan combine exactly"""
        K, L = random_fan_pair(np.random.default_rng(3), 3, symmetric=False)
        M = minkowski_comb(K, L, 0.5)
        assert M.kind == BodyKind.HPOLYTOPE
        u = np.array([0.0, 0.0, 1.0])
        assert support(M, u) == pytest.approx(0.5 * support(K, u) + 0.5 * support(L, u), abs=1e-9)

    @staticmethod
    def _cube_octahedron_fan():
        """Cube and octahedron sharing the normal set {±eᵢ} ∪ {(±1,±1,±1)/√3}"""
        axes = np.vstack([np.eye(3), -np.eye(3)])
        diagonals = np.array([[a, b, c] for a in (1, -1) for b in (1, -1) for c in (1, -1)]) / math.sqrt(3.0)
        normals = np.vstack([axes, diagonals])
        cube = ConvexBody.hpolytope(normals, np.concatenate([np.ones(6), np.full(8, 10.0)]))
        octahedron = ConvexBody.hpolytope(normals, np.concatenate([np.full(6, 10.0), np.full(8, 1.0 / math.sqrt(3.0))]))
        return cube, octahedron

    def test_common_fan_in_space_is_exact(self):
        """Not strongly isomorphic: the combination gains new facet normals"""
        K, L = self._cube_octahedron_fan()
        M = minkowski_comb(K, L, 0.5)
        u = np.array([1.0, 1.0, 0.0]) / math.sqrt(2.0)
        assert support(M, u) == pytest.approx(0.5 * (math.sqrt(2.0) + 1.0 / math.sqrt(2.0)), abs=1e-9)
        for v in np.random.default_rng(5).normal(size=(40, 3)):
            v = v / np.linalg.norm(v)
            assert support(M, v) == pytest.approx(0.5 * support(K, v) + 0.5 * support(L, v), abs=1e-8)
        assert M.is_symmetric

    def test_tight_offsets_overestimate_in_space(self):
        """Combining tight offsets on the shared fan gives a strict superset"""
        K, L = self._cube_octahedron_fan()
        exact = minkowski_comb(K, L, 0.5)
        tight = ConvexBody.hpolytope(
            K.normals, 0.5 * support_values(K, K.normals) + 0.5 * support_values(L, L.normals)
        )
        u = np.array([1.0, 1.0, 0.0]) / math.sqrt(2.0)
        assert support(tight, u) == pytest.approx(math.sqrt(2.0), abs=1e-9)
        assert support(tight, u) > support(exact, u) + 0.3
        assert contains(tight, [0.9, 0.9, 0.0])
        assert not contains(exact, [0.9, 0.9, 0.0])

    def test_common_fan_in_plane_keeps_normals(self):
        K, L = random_fan_pair(np.random.default_rng(4), 2, symmetric=True)
        M = minkowski_comb(K, L, 0.3)
        assert M.kind == BodyKind.HPOLYTOPE
        np.testing.assert_allclose(M.normals, K.normals)

    def test_mixed_combination_on_grid(self):
        """Ball ⊕ box on a grid keeps support linearity at grid directions"""
        grid = DirectionGrid.circle(360)
        M = minkowski_sum(ConvexBody.ball(0.5), ConvexBody.box([1.0, 2.0]), grid=grid)
        assert M.kind == BodyKind.SUPPORT_GRID
        assert support(M, grid.directions[0]) == pytest.approx(1.5, abs=1e-9)

    def test_flags_propagate(self):
        """Symmetry is kept only when both operands are symmetric"""
        K = ConvexBody.box([1.0, 1.0])
        L = random_origin_hpolytope(np.random.default_rng(1), 2)
        M = minkowski_comb(K, L, 0.5)
        assert M.contains_origin
        assert M.is_symmetric == L.is_symmetric

    @settings(max_examples=25, deadline=None)
    @given(
        r1=st.floats(min_value=0.1, max_value=5.0),
        r2=st.floats(min_value=0.1, max_value=5.0),
        lam=st.floats(min_value=0.0, max_value=1.0),
    )
    def test_support_linearity_balls(self, r1, r2, lam):
        """h_{λK+(1−λ)L} = λh_K + (1−λ)h_L"""
        M = minkowski_comb(ConvexBody.ball(r1), ConvexBody.ball(r2), lam)
        assert support(M, [0.0, 1.0]) == pytest.approx(lam * r1 + (1.0 - lam) * r2)


class TestBoundaryCurve:
    """Test 2D boundary discretization"""

    def test_disc_curve(self):
        curve = boundary_curve_2d(ConvexBody.ball(2.0), size=360)
        assert curve.kind == CurveKind.ANALYTIC
        np.testing.assert_allclose(curve.rho, 2.0)
        assert curve.arclength() == pytest.approx(4.0 * math.pi, rel=1e-6)

    def test_square_is_not_c2plus(self):
        """Corners have zero radius of curvature between facet normals"""
        with pytest.raises(NotC2PlusError) as exc:
            boundary_curve_2d(square(1.0), size=360)
        assert exc.value.rho < exc.value.rho_min

    def test_smoothed_square_is_polygon_curve(self):
        curve = boundary_curve_2d(smoothed_square(0.1), size=720)
        assert curve.kind == CurveKind.POLYGON
        assert np.min(curve.rho) >= 0.1 * 0.99

    def test_requires_plane(self):
        with pytest.raises(InputError):
            boundary_curve_2d(ConvexBody.ball(1.0, dim=3))

    def test_grid_polygon_edges_sum_to_perimeter(self):
        """Edge lengths of a constant support grid add to the polygon perimeter"""
        grid = DirectionGrid.circle(720)
        lengths = edge_lengths(np.full(720, 1.0), grid.delta)
        assert np.sum(lengths) == pytest.approx(2.0 * math.pi, rel=1e-5)


class TestFactories:
    """Test body factories and random generators"""

    def test_interval(self):
        K = interval(1.0, 3.0)
        assert K.dim == 1
        assert support(K, [1.0]) == pytest.approx(3.0)
        assert support(K, [-1.0]) == pytest.approx(1.0)

    def test_empty_interval_rejected(self):
        with pytest.raises(InputError):
            interval(-2.0, 1.0)

    def test_proxy_radius(self):
        assert whole_space_proxy(2).radius == pytest.approx(12.0)
        assert whole_space_proxy(9).radius == pytest.approx(18.0)

    def test_polygon_vertices_box(self):
        vertices = polygon_vertices(ConvexBody.box([1.0, 2.0]))
        assert vertices.shape == (4, 2)

    def test_random_symmetric_hpolytope_is_symmetric(self):
        K = random_symmetric_hpolytope(np.random.default_rng(0), 2)
        assert K.is_symmetric
        assert K.contains_origin

    def test_random_origin_hpolytope_contains_origin(self):
        K = random_origin_hpolytope(np.random.default_rng(0), 3)
        assert K.contains_origin
        assert contains(K, [0.0, 0.0, 0.0])

    def test_random_harmonic_body_symmetric(self):
        K = random_harmonic_body(np.random.default_rng(5), symmetric=True)
        assert K.is_symmetric
        assert K.contains_origin

    def test_harmonic_body_raises_constant_for_convexity(self):
        """A large harmonic is compensated by lifting a₀"""
        grid = DirectionGrid.circle(360)
        K = harmonic_body(0.1, np.array([[1.0, 0.0]]), [3], grid, symmetric=False, rho_min=1e-3)
        rho = edge_lengths(K.values, grid.delta) / grid.delta
        assert np.min(rho) >= 1e-3 * 0.999
        assert np.min(K.values) >= 0.05 - 1e-12


class TestBodyFamily:
    """Test one-parameter families h + sψ"""

    def test_valid_family(self):
        grid = DirectionGrid.circle(360)
        base = ConvexBody.support_grid(grid, np.full(360, 1.0))
        family = BodyFamily(base=base, perturbation=Perturbation.harmonic(grid, 2), s_min=-0.1, s_max=0.1)
        validate_family(family)
        member = family_member(family, 0.05)
        assert member.values[0] == pytest.approx(1.05)

    def test_invalid_family(self):
        """Large second harmonic breaks convexity"""
        grid = DirectionGrid.circle(360)
        base = ConvexBody.support_grid(grid, np.full(360, 1.0))
        family = BodyFamily(base=base, perturbation=Perturbation.harmonic(grid, 2), s_min=-1.0, s_max=1.0)
        with pytest.raises(FamilyInvalidError):
            validate_family(family)
