"""
Unit tests for report envelopes and CSV rendering
"""

import json

# Import project modules
import sys
import os
sys.path.append(os.path.join(os.path.dirname(__file__), '../..'))

from src import __version__
from src.interfaces.report_writer import CSV_COLUMNS, build_envelope, render_csv, render_json, write_text
from src.models.report import Verdict


class TestEnvelope:
    """Test the JSON envelope"""

    def test_envelope_fields_in_order(self):
        envelope = build_envelope("gap", {"K": "ball(1, n=2)"}, 7, {"gap": 0.1}, 0.1234567891)
        assert list(envelope) == ["tool", "version", "command", "config", "seed", "wall_time_s", "result"]
        assert envelope["tool"] == "gz"
        assert envelope["version"] == __version__
        assert envelope["wall_time_s"] == 0.123457

    def test_wall_time_omitted(self):
        envelope = build_envelope("alpha", {}, None, {"values": []}, None)
        assert "wall_time_s" not in envelope
        assert envelope["seed"] is None

    def test_render_json_keeps_unicode(self):
        text = render_json(build_envelope("lemmas", {"note": "μ(K)"}, 0, {}, None))
        assert "μ(K)" in text
        assert json.loads(text)["config"]["note"] == "μ(K)"
        assert text.endswith("\n")


class TestCsv:
    """Test fixed-column CSV output"""

    def test_header_only(self):
        assert render_csv("alpha", []) == "R,alpha\n"

    def test_rows_follow_columns(self):
        rows = [{"R": 1.0, "alpha": -0.5, "extra": "ignored"}, {"R": 2.0}]
        lines = render_csv("alpha", rows).splitlines()
        assert lines == ["R,alpha", "1.0,-0.5", "2.0,"]

    def test_enum_cells_use_value(self):
        text = render_csv("lemmas", [{"check": "est2", "verdict": Verdict.HOLDS}])
        assert text.splitlines()[1].split(",")[CSV_COLUMNS["lemmas"].index("verdict")] == "holds"

    def test_every_command_has_columns(self):
        for command in ("measure", "gap", "profile", "lemmas", "alpha", "beta", "bochner",
                        "variation", "localc", "search", "acceptance"):
            assert CSV_COLUMNS[command]


class TestWriteText:
    """Test output files"""

    def test_creates_parent_directories(self, tmp_path):
        target = tmp_path / "nested" / "report.json"
        write_text("{}\n", str(target))
        assert target.read_text(encoding="utf-8") == "{}\n"
