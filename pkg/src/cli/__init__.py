"""
コマンドラインインターフェース
"""

from .acceptance import AcceptanceRunner, CriterionResult, CriterionStatus
from .main import app, main, run

__all__ = [
    "AcceptanceRunner",
    "CriterionResult",
    "CriterionStatus",
    "app",
    "main",
    "run",
]
