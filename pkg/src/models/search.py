"""
探索モデル

反例探索の探索空間・最適化設定・結果を表現します。
"""

from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.report import GapReport


class SearchClass(str, Enum):
    """凸体クラス"""
    SYM = "sym"          # 原点対称
    ORIGIN = "origin"    # 原点を含む


class Parametrization(str, Enum):
    """パラメータ化"""
    HARMONIC = "harmonic"      # 支持関数の調和係数 (n=2)
    INTERVAL = "interval"      # 区間端点 (n=1)
    FIXED_FAN = "fixed_fan"    # 法線扇を固定した H多面体オフセット


class SearchSpace(BaseModel):
    """探索空間"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    body_class: SearchClass = Field(..., description="クラス")
    dim: int = Field(..., ge=1, le=3)
    parametrization: Parametrization
    harmonic_orders: List[int] = Field(default_factory=list, description="使用する調和次数")
    grid_size: int = Field(default=720, description="n=2 の角度グリッド")
    normals: Optional[np.ndarray] = Field(None, description="固定法線扇")
    lower: np.ndarray = Field(..., description="1体分の下限")
    upper: np.ndarray = Field(..., description="1体分の上限")
    h_min: float = Field(default=0.05, gt=0, description="origin クラスの支持値下限")
    rho_min: float = Field(default=1e-3, gt=0, description="デコード時の曲率半径下限")

    @model_validator(mode="after")
    def _check_bounds(self) -> "SearchSpace":
        if self.lower.shape != self.upper.shape or np.any(self.lower > self.upper):
            raise ValueError("境界が不正です")
        return self

    @property
    def body_dimension(self) -> int:
        return int(self.lower.shape[0])

    @property
    def dimension(self) -> int:
        """(K, L) の全パラメータ数"""
        return 2 * self.body_dimension

    def bounds(self) -> List[tuple]:
        lo = np.concatenate([self.lower, self.lower])
        hi = np.concatenate([self.upper, self.upper])
        return list(zip(lo.tolist(), hi.tolist()))

    def clamp(self, x: np.ndarray) -> np.ndarray:
        lo = np.concatenate([self.lower, self.lower])
        hi = np.concatenate([self.upper, self.upper])
        return np.clip(np.asarray(x, dtype=float), lo, hi)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "class": self.body_class.value,
            "dim": self.dim,
            "parametrization": self.parametrization.value,
            "harmonic_orders": self.harmonic_orders,
            "grid_size": self.grid_size,
            "facets": None if self.normals is None else int(self.normals.shape[0]),
            "h_min": self.h_min,
            "rho_min": self.rho_min,
            "parameters": self.dimension,
        }


class SearchObjective(str, Enum):
    """目的関数"""
    MIN_GAP = "min_gap"
    P_STAR = "p_star"


class OptimizerConfig(BaseModel):
    """Nelder–Mead とリスタートの設定"""
    restarts: int = Field(default=16, ge=1, description="リスタート数")
    max_evaluations: int = Field(default=3200, ge=1, description="全リスタート合計の評価回数（均等割り）")
    xatol: float = Field(default=1e-4, gt=0)
    fatol: float = Field(default=1e-9, gt=0)
    verification_factor: int = Field(default=10, ge=1, description="再検証時の予算倍率")

    @property
    def evaluations_per_restart(self) -> int:
        return max(1, self.max_evaluations // self.restarts)


class TrajectoryEntry(BaseModel):
    """探索軌跡の1行"""
    restart: int
    evaluation: int
    objective: float
    stderr: float
    best_so_far: float
    failed: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump()


class SearchResult(BaseModel):
    """探索結果"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    objective: SearchObjective
    best_parameters: List[float]
    best_objective: float
    best_stderr: float
    best_restart: int
    evaluations: int
    failed_evaluations: int = 0
    seed: int
    p: Optional[float] = None
    certified_violation: bool = Field(default=False, description="10倍予算で再検証済みの違反")
    verification: List[GapReport] = Field(default_factory=list)
    best_pair: Dict[str, Any] = Field(default_factory=dict, description="最良ペアの凸体")
    upper_constant_consistent: Optional[bool] = Field(None, description="p ∈ [0.25, 1−2/π] との整合（記録のみ）")
    trajectory: List[TrajectoryEntry] = Field(default_factory=list)
    space: Dict[str, Any] = Field(default_factory=dict)

    def to_dict(self, include_trajectory: bool = False) -> Dict[str, Any]:
        data = {
            "objective": self.objective.value,
            "best_parameters": self.best_parameters,
            "best_objective": self.best_objective,
            "best_stderr": self.best_stderr,
            "best_restart": self.best_restart,
            "evaluations": self.evaluations,
            "failed_evaluations": self.failed_evaluations,
            "seed": self.seed,
            "p": self.p,
            "certified_violation": self.certified_violation,
            "verification": [g.to_dict() for g in self.verification],
            "best_pair": self.best_pair,
            "upper_constant_consistent": self.upper_constant_consistent,
            "space": self.space,
        }
        if include_trajectory:
            data["trajectory"] = [t.to_dict() for t in self.trajectory]
        return data
