"""
入出力インターフェース - 仕様ファイルの読み込みとレポート出力
"""

from .report_writer import CSV_COLUMNS, build_envelope, render_csv, render_json, write_text
from .spec_loader import (
    BodySpec,
    PerturbationSpec,
    load_body_file,
    load_body_pair,
    load_perturbation_file,
    load_suite,
    parse_body,
    parse_grid,
    parse_measure,
    parse_perturbation,
)

__all__ = [
    # 読み込み
    "BodySpec",
    "PerturbationSpec",
    "load_body_file",
    "load_body_pair",
    "load_perturbation_file",
    "load_suite",
    "parse_body",
    "parse_grid",
    "parse_measure",
    "parse_perturbation",

    # 出力
    "CSV_COLUMNS",
    "build_envelope",
    "render_csv",
    "render_json",
    "write_text",
]
