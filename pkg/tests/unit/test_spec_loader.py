"""
Unit tests for inline shorthands and spec file loading
"""

import json

import numpy as np
import pytest

# Import project modules
import sys
import os
sys.path.append(os.path.join(os.path.dirname(__file__), '../..'))

from src.exceptions import InputError, SpecFileError
from src.interfaces.spec_loader import (
    load_body_file,
    load_body_pair,
    load_perturbation_file,
    load_suite,
    parse_body,
    parse_grid,
    parse_measure,
    parse_perturbation,
)
from src.models.body import BodyKind, DirectionGrid
from src.models.potential import PotentialKind


def write_json(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


class TestShorthands:
    """Test inline body, measure and perturbation notation"""

    def test_ball(self):
        body = parse_body("ball:1.5", dim=3)
        assert body.kind == BodyKind.BALL
        assert body.radius == 1.5
        assert body.dim == 3

    def test_box_and_ellipse(self):
        assert list(parse_body("box:1,2").half_widths) == [1.0, 2.0]
        assert parse_body("ellipse:2,1").kind == BodyKind.ELLIPSOID

    def test_interval_endpoints(self):
        body = parse_body("interval:-1,2")
        assert body.dim == 1
        assert sorted(body.offsets.tolist()) == [1.0, 2.0]
        assert not body.is_symmetric

    def test_square_and_proxy(self):
        assert parse_body("square").kind == BodyKind.HPOLYTOPE
        assert parse_body("smoothed-square:0.2").kind == BodyKind.SUPPORT_GRID
        assert parse_body("proxy", dim=2).radius == 12.0

    @pytest.mark.parametrize("text", ["blob:1", "ball:1,2", "ball:abc", "ellipse:1"])
    def test_bad_bodies(self, text):
        with pytest.raises(InputError):
            parse_body(text)

    def test_measures(self):
        assert parse_measure("gaussian", 2).kind == PotentialKind.GAUSSIAN
        diag = parse_measure("diag:1,4", 2)
        assert diag.kind == PotentialKind.DIAG_QUADRATIC
        assert diag.k1 == 1.0
        with pytest.raises(InputError):
            parse_measure("diag:1,4", 3)
        with pytest.raises(InputError):
            parse_measure("cauchy", 2)

    def test_perturbations(self):
        grid = DirectionGrid.circle(64)
        np.testing.assert_allclose(parse_perturbation("one", grid).values, 1.0)
        np.testing.assert_allclose(parse_perturbation("const:2.5", grid).values, 2.5)
        np.testing.assert_allclose(parse_perturbation("sin:3", grid).values, np.sin(3 * grid.angles))
        with pytest.raises(InputError):
            parse_perturbation("wave:1", grid)


class TestGrid:
    """Test lambda and radius grids"""

    def test_list(self):
        assert parse_grid("0.1,0.5,0.9") == [0.1, 0.5, 0.9]

    def test_range_includes_endpoint(self):
        assert parse_grid("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]

    def test_bad_range(self):
        with pytest.raises(InputError):
            parse_grid("1:0:0.1")
        with pytest.raises(InputError):
            parse_grid("0:1:0")


class TestBodyFiles:
    """Test JSON body specs"""

    def test_load_box(self, tmp_path):
        body = load_body_file(write_json(tmp_path / "box.json", {"kind": "box", "half_widths": [1, 2]}))
        assert body.kind == BodyKind.BOX

    def test_load_labelled_harmonic(self, tmp_path):
        path = write_json(tmp_path / "h.json", {
            "kind": "harmonic", "a0": 1.0, "coefficients": [[0.1, 0.0]], "orders": [2],
            "symmetric": True, "grid_size": 180, "label": "oval",
        })
        body = load_body_file(path)
        assert body.kind == BodyKind.SUPPORT_GRID
        assert body.is_symmetric
        assert body.label == "oval"

    def test_load_pair(self, tmp_path):
        path = write_json(tmp_path / "pair.json", {
            "K": {"kind": "ball", "radius": 1}, "L": {"kind": "ball", "radius": 2},
        })
        K, L = load_body_pair(path)
        assert (K.radius, L.radius) == (1.0, 2.0)

    def test_malformed_json_reports_line(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{\n  "kind": "ball",\n  radius: 1\n}', encoding="utf-8")
        with pytest.raises(SpecFileError) as excinfo:
            load_body_file(str(path))
        assert excinfo.value.location.startswith("line 3")
        assert excinfo.value.path == str(path)

    def test_field_error_location(self, tmp_path):
        path = write_json(tmp_path / "neg.json", {"kind": "ball", "radius": -1})
        with pytest.raises(SpecFileError) as excinfo:
            load_body_file(path)
        assert excinfo.value.location == "radius"

    def test_unknown_field_rejected(self, tmp_path):
        path = write_json(tmp_path / "extra.json", {"kind": "ball", "radius": 1, "colour": "red"})
        with pytest.raises(SpecFileError) as excinfo:
            load_body_file(path)
        assert excinfo.value.location == "colour"

    def test_missing_required_field(self, tmp_path):
        path = write_json(tmp_path / "box.json", {"kind": "box"})
        with pytest.raises(SpecFileError) as excinfo:
            load_body_file(path)
        assert excinfo.value.location == "half_widths"

    def test_missing_key_in_pair(self, tmp_path):
        path = write_json(tmp_path / "pair.json", {"K": {"kind": "ball", "radius": 1}})
        with pytest.raises(SpecFileError) as excinfo:
            load_body_pair(path)
        assert excinfo.value.location == "L"

    def test_missing_file(self, tmp_path):
        with pytest.raises(SpecFileError):
            load_body_file(str(tmp_path / "absent.json"))


class TestPerturbationFiles:
    """Test JSON perturbation specs"""

    def test_harmonics_sum(self, tmp_path):
        grid = DirectionGrid.circle(128)
        path = write_json(tmp_path / "psi.json", {
            "constant": 1.0, "harmonics": [{"k": 2, "amplitude": 0.5, "phase": "cos"}],
        })
        psi = load_perturbation_file(path, grid)
        np.testing.assert_allclose(psi.values, 1.0 + 0.5 * np.cos(2 * grid.angles))

    def test_values_on_same_grid(self, tmp_path):
        grid = DirectionGrid.circle(16)
        path = write_json(tmp_path / "psi.json", {"values": list(range(16))})
        np.testing.assert_allclose(load_perturbation_file(path, grid).values, np.arange(16))

    def test_bad_harmonic_term(self, tmp_path):
        path = write_json(tmp_path / "psi.json", {"harmonics": [{"amplitude": 1.0}]})
        with pytest.raises(SpecFileError) as excinfo:
            load_perturbation_file(path, DirectionGrid.circle(32))
        assert excinfo.value.location == "harmonics.0"


class TestSuites:
    """Test YAML acceptance suites"""

    def test_requires_criteria(self, tmp_path):
        path = tmp_path / "suite.yaml"
        path.write_text("name: empty\n", encoding="utf-8")
        with pytest.raises(SpecFileError) as excinfo:
            load_suite(str(path))
        assert excinfo.value.location == "criteria"

    def test_yaml_error_location(self, tmp_path):
        path = tmp_path / "suite.yaml"
        path.write_text("criteria:\n  - id: 1\n    name: [unclosed\n", encoding="utf-8")
        with pytest.raises(SpecFileError):
            load_suite(str(path))

    def test_primary_suite_loads(self):
        suite = load_suite(os.path.join(os.path.dirname(__file__), "../../src/cli/suites/primary.yaml"))
        assert len(suite["criteria"]) == 13
        assert all({"id", "handler"} <= set(c) for c in suite["criteria"])
