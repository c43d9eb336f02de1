"""
Unit tests for the counterexample search engine
Tests search spaces, decoding, seeded restarts and violation certification
"""

import pytest
import numpy as np
from hypothesis import given, settings, strategies as st

# Import project modules
import sys
import os
sys.path.append(os.path.join(os.path.dirname(__file__), '../..'))

from src.config import LabSettings
from src.engines.inequalities import InequalityChecker
from src.engines.measures import make_gaussian
from src.engines.search import (
    FAILED_PENALTY,
    CounterexampleSearch,
    decode_pair,
    default_space,
    fan_space,
    harmonic_space,
    interval_space,
)
from src.exceptions import DegenerateInputError, InputError, SearchDegenerateError
from src.models.body import BodyKind
from src.models.search import OptimizerConfig, Parametrization, SearchClass, SearchObjective


@pytest.fixture
def searcher():
    settings = LabSettings(default_budget=20_000, workers=2)
    return CounterexampleSearch(settings, InequalityChecker(settings))


@pytest.fixture
def small_config():
    return OptimizerConfig(restarts=2, max_evaluations=40)


class TestSearchSpaces:
    """Test search space construction"""

    def test_default_spaces(self):
        assert default_space(SearchClass.SYM, 1).parametrization == Parametrization.INTERVAL
        assert default_space(SearchClass.ORIGIN, 2).parametrization == Parametrization.HARMONIC
        assert default_space(SearchClass.ORIGIN, 3).parametrization == Parametrization.FIXED_FAN

    def test_symmetric_harmonic_space_uses_even_orders(self):
        space = harmonic_space(SearchClass.SYM)
        assert all(k % 2 == 0 for k in space.harmonic_orders)
        assert space.body_dimension == 1 + 2 * len(space.harmonic_orders)
        assert space.dimension == 2 * space.body_dimension

    def test_odd_orders_rejected_for_symmetric_class(self):
        with pytest.raises(InputError):
            harmonic_space(SearchClass.SYM, orders=[1, 2])

    def test_interval_space_sizes(self):
        assert interval_space(SearchClass.SYM).body_dimension == 1
        assert interval_space(SearchClass.ORIGIN).body_dimension == 2

    def test_fan_space_dimension(self):
        with pytest.raises(InputError):
            fan_space(SearchClass.ORIGIN, 1)

    def test_clamp(self):
        space = interval_space(SearchClass.ORIGIN)
        clamped = space.clamp(np.array([-1.0, 10.0, 0.5, 0.5]))
        np.testing.assert_allclose(clamped, [0.05, 5.0, 0.5, 0.5])


class TestDecoding:
    """Test parameter decoding into bodies"""

    def test_decode_symmetric_harmonic_pair(self):
        space = harmonic_space(SearchClass.SYM, grid_size=180)
        x = np.random.default_rng(0).uniform(*np.array(space.bounds()).T)
        K, L = decode_pair(space, x)
        assert K.kind == BodyKind.SUPPORT_GRID
        assert K.is_symmetric and L.is_symmetric
        assert K.contains_origin and L.contains_origin

    def test_decode_origin_harmonic_lifts_to_h_min(self):
        space = harmonic_space(SearchClass.ORIGIN, grid_size=180)
        x = np.array([b[0] for b in space.bounds()])
        K, _ = decode_pair(space, x)
        assert np.min(K.values) >= space.h_min - 1e-12

    def test_decode_intervals(self):
        K, L = decode_pair(interval_space(SearchClass.ORIGIN), np.array([1.0, 2.0, 0.5, 3.0]))
        assert K.dim == 1
        np.testing.assert_allclose(sorted(K.offsets), [1.0, 2.0])
        assert not L.is_symmetric

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(min_value=-10.0, max_value=10.0), min_size=4, max_size=4))
    def test_interval_decoder_is_total(self, raw):
        """Any parameter vector decodes to a valid pair after clamping"""
        K, L = decode_pair(interval_space(SearchClass.ORIGIN), np.array(raw))
        assert K.contains_origin and L.contains_origin
        assert np.all(K.offsets >= 0.05 - 1e-12)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31 - 1))
    def test_symmetric_harmonic_decoder_is_total(self, seed):
        space = harmonic_space(SearchClass.SYM, grid_size=90)
        x = np.random.default_rng(seed).uniform(-20.0, 20.0, space.dimension)
        K, L = decode_pair(space, x)
        assert K.is_symmetric and L.is_symmetric

    def test_decode_fixed_fan(self):
        space = fan_space(SearchClass.SYM, 3, facets=8)
        x = np.full(space.dimension, 1.0)
        K, L = decode_pair(space, x)
        assert K.is_symmetric
        assert K.normals.shape[0] == 2 * space.body_dimension


class TestMinGapSearch:
    """Test the fixed-p search"""

    def test_interval_search_finds_no_violation(self, searcher, small_config):
        result = searcher.search_min_gap(
            make_gaussian(1), interval_space(SearchClass.SYM), 1.0, [0.25, 0.5, 0.75], config=small_config,
        )
        assert result.objective == SearchObjective.MIN_GAP
        assert not result.certified_violation
        assert result.evaluations > 0
        assert result.failed_evaluations == 0
        assert result.best_objective >= -1e-7

    def test_search_is_deterministic(self, searcher, small_config):
        space = interval_space(SearchClass.ORIGIN)
        first = searcher.search_min_gap(make_gaussian(1), space, 0.5, [0.5], config=small_config)
        second = searcher.search_min_gap(make_gaussian(1), space, 0.5, [0.5], config=small_config)
        assert first.best_objective == second.best_objective
        assert first.best_parameters == second.best_parameters

    def test_harmonic_search_small(self, searcher):
        space = harmonic_space(SearchClass.ORIGIN, orders=[1, 2], grid_size=90)
        config = OptimizerConfig(restarts=2, max_evaluations=16)
        result = searcher.search_min_gap(make_gaussian(2), space, 0.25, [0.5], config=config)
        assert set(result.best_pair) == {"K", "L"}
        assert len(result.trajectory) == result.evaluations
        assert result.to_dict()["space"]["parametrization"] == "harmonic"

    def test_large_exponent_is_certified(self, searcher, small_config):
        """Short intervals carry nearly linear mass, so the fourth power is convex"""
        result = searcher.search_min_gap(
            make_gaussian(1), interval_space(SearchClass.ORIGIN, h_max=0.3), 4.0, [0.5], config=small_config,
        )
        assert result.best_objective < 0
        assert result.verification
        assert result.certified_violation

    def test_non_positive_p_rejected(self, searcher, small_config):
        with pytest.raises(InputError):
            searcher.search_min_gap(make_gaussian(1), interval_space(SearchClass.SYM), 0.0, config=small_config)

    def test_dimension_mismatch(self, searcher, small_config):
        with pytest.raises(InputError):
            searcher.search_min_gap(make_gaussian(2), interval_space(SearchClass.SYM), 0.5, config=small_config)

    def test_all_failures_raise(self, searcher, small_config, mocker):
        mocker.patch.object(searcher.checker, "min_gap", side_effect=DegenerateInputError("vanishing"))
        with pytest.raises(SearchDegenerateError):
            searcher.search_min_gap(make_gaussian(1), interval_space(SearchClass.SYM), 0.5, config=small_config)

    def test_failures_get_penalty(self, searcher, small_config, mocker):
        original = searcher.checker.min_gap
        calls = {"count": 0}

        def flaky(*args, **kwargs):
            calls["count"] += 1
            if calls["count"] % 3 == 0:
                raise DegenerateInputError("vanishing")
            return original(*args, **kwargs)

        mocker.patch.object(searcher.checker, "min_gap", side_effect=flaky)
        result = searcher.search_min_gap(make_gaussian(1), interval_space(SearchClass.SYM), 0.5, config=small_config)
        failed = [t for t in result.trajectory if t.failed]
        assert failed
        assert all(t.objective == FAILED_PENALTY for t in failed)
        assert result.best_objective < FAILED_PENALTY


class TestProfileSearch:
    """Test the p* objective"""

    def test_dimension_one_profile_search(self, searcher, small_config):
        result = searcher.search_profile(
            make_gaussian(1), interval_space(SearchClass.SYM), [0.5], config=small_config, tol=1e-2,
        )
        assert result.objective == SearchObjective.P_STAR
        assert result.best_objective >= 1.0 - 1e-2
        assert result.upper_constant_consistent is None
