"""
ポテンシャルモデル

対数凹測度 μ = e^{−V}dx を凸関数 V のオラクル（値・勾配・ヘッセ行列）と
宣言された曲率定数 (k₁, k₂) で表現します。オラクルはバッチ (m, n) 入力を受け取ります。
"""

import math
from enum import Enum
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

# オラクル型: (m, n) -> (m,) / (m, n) / (m, n, n)
Oracle = Callable[[np.ndarray], np.ndarray]


class PotentialKind(str, Enum):
    """ポテンシャル種別"""
    GAUSSIAN = "gaussian"
    DIAG_QUADRATIC = "diag_quadratic"
    CUSTOM = "custom"


class Potential(BaseModel):
    """凸ポテンシャル V と曲率定数"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: PotentialKind = Field(..., description="種別タグ")
    dim: int = Field(..., ge=1, description="次元 n")
    eval: Oracle = Field(..., description="x ↦ V(x)")
    grad: Oracle = Field(..., description="x ↦ ∇V(x)")
    hess: Oracle = Field(..., description="x ↦ ∇²V(x)")
    k1: float = Field(..., ge=0.0, description="宣言された下側曲率 ∇²V ≥ k₁Id")
    k2: float = Field(..., description="宣言された ΔV ≤ k₂n")
    is_even: bool = Field(default=False, description="V(x) = V(−x)")
    coefficients: Optional[List[float]] = Field(None, description="diag_quadratic の係数 cᵢ")
    log_normalizer: Optional[float] = Field(None, description="log ∫e^{−V}（既知の場合）")

    @model_validator(mode="after")
    def _check_bounds_order(self) -> "Potential":
        if self.k2 < self.k1:
            raise ValueError("k2 ≥ k1 が必要です")
        return self

    @property
    def ratio(self) -> float:
        """R = k₂/k₁"""
        if self.k1 <= 0:
            return math.inf
        return self.k2 / self.k1

    @property
    def is_quadratic(self) -> bool:
        return self.kind in (PotentialKind.GAUSSIAN, PotentialKind.DIAG_QUADRATIC)

    @property
    def is_normalized(self) -> bool:
        return self.log_normalizer is not None

    def quadratic_coefficients(self) -> np.ndarray:
        """V(x) = Σcᵢxᵢ²/2 の係数"""
        if self.kind == PotentialKind.GAUSSIAN:
            return np.ones(self.dim)
        if self.kind == PotentialKind.DIAG_QUADRATIC:
            return np.asarray(self.coefficients, dtype=float)
        raise ValueError("二次形式ではありません")

    def normalizer(self) -> float:
        """Z = ∫e^{−V}（未知なら1）"""
        return math.exp(self.log_normalizer) if self.log_normalizer is not None else 1.0

    def density(self, x: np.ndarray) -> np.ndarray:
        """e^{−V(x)}/Z"""
        pts = np.atleast_2d(x)
        return np.exp(-self.eval(pts) - (self.log_normalizer or 0.0))

    def log_weight_vs_gaussian(self, x: np.ndarray) -> np.ndarray:
        """標準ガウス参照の重要度重み log(dμ/dγ)"""
        pts = np.atleast_2d(x)
        if self.kind == PotentialKind.GAUSSIAN:
            return np.zeros(pts.shape[0])
        if self.kind == PotentialKind.DIAG_QUADRATIC:
            c = self.quadratic_coefficients()
            return 0.5 * float(np.sum(np.log(c))) - 0.5 * (pts**2) @ (c - 1.0)
        return (
            -self.eval(pts)
            - (self.log_normalizer or 0.0)
            + 0.5 * np.sum(pts**2, axis=1)
            + 0.5 * self.dim * math.log(2.0 * math.pi)
        )

    def laplacian(self, x: np.ndarray) -> np.ndarray:
        """ΔV = tr ∇²V"""
        return np.trace(self.hess(np.atleast_2d(x)), axis1=1, axis2=2)

    def value_at(self, x: Any) -> float:
        return float(self.eval(np.atleast_2d(np.asarray(x, dtype=float)))[0])

    def gradient_at(self, x: Any) -> np.ndarray:
        return self.grad(np.atleast_2d(np.asarray(x, dtype=float)))[0]

    def hessian_at(self, x: Any) -> np.ndarray:
        return self.hess(np.atleast_2d(np.asarray(x, dtype=float)))[0]

    def describe(self) -> str:
        if self.kind == PotentialKind.GAUSSIAN:
            return f"gaussian(n={self.dim})"
        if self.kind == PotentialKind.DIAG_QUADRATIC:
            return "diag(" + ",".join(f"{c:g}" for c in self.coefficients) + ")"
        return f"custom(n={self.dim})"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "dim": self.dim,
            "c": self.coefficients,
            "k1": self.k1,
            "k2": self.k2,
            "R": self.ratio if self.k1 > 0 else None,
            "is_even": self.is_even,
            "normalized": self.is_normalized,
        }


class BoundsReport(BaseModel):
    """曲率定数のスポットチェック結果"""

    min_eigenvalue: float = Field(..., description="最小固有値の最小")
    max_trace_over_n: float = Field(..., description="tr(∇²V)/n の最大")
    k1: float
    k2: float
    passed: bool = Field(..., description="宣言された範囲内か")
    worst_point: Optional[List[float]] = Field(None, description="最悪点")
    violated_bound: Optional[str] = Field(None, description="違反した定数 (k1/k2)")
    points_checked: int = Field(..., ge=0)

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump()


class OracleReport(BaseModel):
    """オラクル整合性（中心差分・偶関数性）のチェック結果"""

    grad_error: float = Field(..., ge=0.0, description="勾配の相対誤差の最大")
    hess_error: float = Field(..., ge=0.0, description="ヘッセ行列の相対誤差の最大")
    even_error: float = Field(default=0.0, ge=0.0, description="偶関数性の誤差（偶でない V は 0）")
    passed: bool
    points_checked: int = Field(..., ge=0)

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump()
