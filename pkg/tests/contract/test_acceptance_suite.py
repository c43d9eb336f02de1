"""
受け入れスイートのコントラクトテスト。

このテストは、acceptance コマンドがスイートの基準を選択・実行し、
基準ごとの状態と集約した終了コードを報告することを検証します。
"""

import pytest

# Import project modules
import sys
import os
sys.path.append(os.path.join(os.path.dirname(__file__), '../..'))

from src.cli.main import EXIT_INPUT, EXIT_OK


@pytest.mark.slow
class TestAcceptanceSuite:
    """acceptance コマンドのコントラクト。"""

    def test_closed_form_criteria_pass(self, gz_json):
        code, report = gz_json("acceptance", "--only", "1,4,5,6", "--scale", "0.1")
        criteria = report["result"]["criteria"]
        assert [c["criterion"] for c in criteria] == [1, 4, 5, 6]
        assert all(c["status"] == "passed" for c in criteria)
        assert all(c["wall_time_s"] is None for c in criteria)
        assert code == EXIT_OK

    def test_csv_rows(self, gz):
        code, out, _ = gz("acceptance", "--only", "4", "--format", "csv")
        assert code == EXIT_OK
        lines = out.splitlines()
        assert lines[0] == "criterion,name,status,verdict,value,wall_time_s,target_s"
        assert lines[1].startswith("4,alpha suite,passed")

    def test_unknown_criterion(self, gz):
        code, _, _ = gz("acceptance", "--only", "99")
        assert code == EXIT_INPUT

    def test_unknown_suite(self, gz):
        code, _, _ = gz("acceptance", "--suite", "missing")
        assert code == EXIT_INPUT
