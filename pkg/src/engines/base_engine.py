"""
ベースエンジンクラス

数値エンジン共通の能力定義・ステータス・メトリクス・並列実行を提供します。
"""

import logging
import threading
import time
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from datetime import datetime
from enum import Enum
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, TypeVar

from pydantic import BaseModel, Field

from src.config import LabSettings, get_settings

# ログ設定
logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class EngineStatus(str, Enum):
    """エンジンステータス"""
    IDLE = "idle"        # 待機中
    ACTIVE = "active"    # 実行中
    ERROR = "error"      # エラー


class EngineCapability(BaseModel):
    """エンジン能力定義"""
    capability_name: str = Field(..., description="能力名")
    description: str = Field(..., description="能力の説明")
    input_types: List[str] = Field(default_factory=list, description="入力タイプ")
    output_types: List[str] = Field(default_factory=list, description="出力タイプ")


class EngineMetrics(BaseModel):
    """エンジンメトリクス"""
    engine_id: str = Field(..., description="エンジンID")
    evaluations: int = Field(default=0, description="実行回数")
    errors_count: int = Field(default=0, description="エラー数")
    total_processing_time_ms: int = Field(default=0, description="総処理時間（ミリ秒）")
    per_capability: Dict[str, int] = Field(default_factory=dict, description="能力ごとの実行回数")
    last_activity: Optional[datetime] = Field(None, description="最後の活動時刻")

    def record_evaluation(self, capability: str) -> None:
        """実行を記録"""
        self.evaluations += 1
        self.per_capability[capability] = self.per_capability.get(capability, 0) + 1
        self.last_activity = datetime.utcnow()

    def record_error(self) -> None:
        """エラーを記録"""
        self.errors_count += 1
        self.last_activity = datetime.utcnow()

    def record_processing_time(self, duration_ms: int) -> None:
        """処理時間を記録"""
        self.total_processing_time_ms += duration_ms


class BaseEngine(ABC):
    """ベースエンジンクラス"""

    def __init__(
        self,
        engine_id: str,
        name: str,
        description: str,
        settings: Optional[LabSettings] = None,
    ):
        """
        エンジンを初期化

        Args:
            engine_id: エンジン固有ID
            name: エンジン名
            description: エンジンの説明
            settings: 実行時設定（省略時は環境から読み込み）
        """
        self.engine_id = engine_id
        self.name = name
        self.description = description
        self.settings = settings or get_settings()
        self.capabilities = self._define_capabilities()

        self.status = EngineStatus.IDLE
        self.created_at = datetime.utcnow()
        self.metrics = EngineMetrics(engine_id=engine_id)
        self._lock = threading.Lock()

        logger.debug(f"エンジン初期化: {self.name} (ID: {self.engine_id})")

    @abstractmethod
    def _define_capabilities(self) -> List[EngineCapability]:
        """エンジンの能力を定義"""
        pass

    def has_capability(self, capability_name: str) -> bool:
        return any(c.capability_name == capability_name for c in self.capabilities)

    @contextmanager
    def track(self, capability: str) -> Iterator[None]:
        """能力の実行を計測・記録"""
        start = time.perf_counter()
        with self._lock:
            self.status = EngineStatus.ACTIVE
        try:
            yield
        except Exception:
            with self._lock:
                self.metrics.record_error()
                self.status = EngineStatus.ERROR
            raise
        finally:
            duration_ms = int((time.perf_counter() - start) * 1000)
            with self._lock:
                self.metrics.record_evaluation(capability)
                self.metrics.record_processing_time(duration_ms)
                if self.status == EngineStatus.ACTIVE:
                    self.status = EngineStatus.IDLE
            logger.debug(f"{self.name}.{capability} 完了 ({duration_ms}ms)")

    def parallel_map(self, fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
        """スレッドプールで並列実行し、入力順に結果を返す"""
        items = list(items)
        count = workers or self.settings.workers
        if count <= 1 or len(items) <= 1:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=count) as executor:
            return list(executor.map(fn, items))

    def get_status_info(self) -> Dict[str, Any]:
        """エンジンステータス情報を取得"""
        return {
            "engine_id": self.engine_id,
            "name": self.name,
            "status": self.status.value,
            "capabilities": [c.capability_name for c in self.capabilities],
            "metrics": self.metrics.model_dump(),
            "created_at": self.created_at.isoformat(),
        }
