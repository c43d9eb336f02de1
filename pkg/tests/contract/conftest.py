"""
CLI コントラクトテストの共通フィクスチャ。
"""

import json

import pytest

# Import project modules
import sys
import os
sys.path.append(os.path.join(os.path.dirname(__file__), '../..'))

from src.cli.main import run
from src.config import get_settings


@pytest.fixture(autouse=True)
def reproducible_settings(monkeypatch):
    """壁時計時間を省略した再現可能なレポート設定。"""
    monkeypatch.setenv("GZ_REPRODUCIBLE_REPORTS", "1")
    monkeypatch.setenv("GZ_DEFAULT_BUDGET", "20000")
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def gz(capsys):
    """gz を実行して (終了コード, 標準出力, 標準エラー) を返す。"""

    def invoke(*args: str):
        code = run(list(args))
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return invoke


@pytest.fixture
def gz_json(gz):
    """JSON レポートを辞書として返す。"""

    def invoke(*args: str):
        code, out, err = gz(*args)
        return code, json.loads(out)

    return invoke
