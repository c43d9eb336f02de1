"""
ログ設定

標準 logging のロガーを structlog の ProcessorFormatter で構造化出力します。
"""

import logging
import sys
from typing import Optional

import structlog


def configure_logging(level: str = "WARNING", fmt: str = "console", stream: Optional[object] = None) -> None:
    """
    ルートロガーを設定

    Args:
        level: ログレベル名
        fmt: "console" または "json"
        stream: 出力先（既定は標準エラー）
    """
    if fmt == "json":
        renderer = structlog.processors.JSONRenderer(ensure_ascii=False)
    else:
        renderer = structlog.dev.ConsoleRenderer(colors=False)

    formatter = structlog.stdlib.ProcessorFormatter(
        foreign_pre_chain=[
            structlog.stdlib.add_log_level,
            structlog.stdlib.add_logger_name,
            structlog.processors.TimeStamper(fmt="iso"),
        ],
        processors=[
            structlog.stdlib.ProcessorFormatter.remove_processors_meta,
            renderer,
        ],
    )

    handler = logging.StreamHandler(stream or sys.stderr)
    handler.setFormatter(formatter)

    root = logging.getLogger()
    root.handlers = [handler]
    root.setLevel(level.upper())
