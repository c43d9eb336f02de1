"""
レポート出力

JSON エンベロープ {tool, version, command, config, seed, wall_time_s, result} と
コマンドごとに固定列の CSV を生成します。
"""

import csv
import io
import json
from pathlib import Path
from typing import Any, Dict, List, Optional

from src import __version__

TOOL_NAME = "gz"

# コマンドごとの CSV 列
CSV_COLUMNS: Dict[str, List[str]] = {
    "measure": ["value", "stderr", "budget", "method", "moment_value", "moment_stderr"],
    "gap": ["lambda", "p", "gap", "stderr", "verdict", "mu_K", "mu_L", "mu_M"],
    "profile": ["lambda", "p_star", "gap", "stderr", "verdict", "flagged"],
    "lemmas": ["check", "value", "stderr", "verdict", "direction", "message"],
    "alpha": ["R", "alpha"],
    "beta": ["R", "beta"],
    "bochner": ["R", "lhs", "bulk", "boundary", "residual", "beta"],
    "variation": ["order", "formula", "fd", "fd_half", "step", "relative_error", "step_halving_change"],
    "localc": ["c", "capped", "mu", "first", "second", "dim"],
    "search": ["restart", "evaluation", "objective", "stderr", "best_so_far", "failed"],
    "acceptance": ["criterion", "name", "status", "verdict", "value", "wall_time_s", "target_s"],
}


def build_envelope(
    command: str,
    config: Dict[str, Any],
    seed: Optional[int],
    result: Dict[str, Any],
    wall_time_s: Optional[float],
) -> Dict[str, Any]:
    """レポートのエンベロープ（wall_time_s が None なら省略）"""
    envelope: Dict[str, Any] = {
        "tool": TOOL_NAME,
        "version": __version__,
        "command": command,
        "config": config,
        "seed": seed,
    }
    if wall_time_s is not None:
        envelope["wall_time_s"] = round(wall_time_s, 6)
    envelope["result"] = result
    return envelope


def render_json(envelope: Dict[str, Any]) -> str:
    return json.dumps(envelope, ensure_ascii=False, indent=2, default=str) + "\n"


def render_csv(command: str, rows: List[Dict[str, Any]]) -> str:
    """固定列の CSV（未知の列は無視、欠損は空欄）"""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS[command], extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _cell(v) for k, v in row.items()})
    return buffer.getvalue()


def _cell(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "value"):
        return value.value
    return value


def write_text(text: str, output: Optional[str]) -> None:
    """ファイルへ UTF-8 で書き出し（親ディレクトリは作成）"""
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
