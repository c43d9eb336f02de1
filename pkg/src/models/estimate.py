"""
推定値モデル

積分の統一的な出力（値・標準誤差・予算・手法）と乱数指定を表現します。
"""

import math
from enum import Enum
from typing import Any, Dict, List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class EstimateMethod(str, Enum):
    """推定手法タグ"""
    MC = "mc"                                  # モンテカルロ
    RADIAL_QUADRATURE = "radial_quadrature"    # 動径求積
    CLOSED_FORM = "closed_form"                # 閉形式

    @property
    def is_deterministic(self) -> bool:
        return self is not EstimateMethod.MC


class MethodChoice(str, Enum):
    """手法の指定（CLI の --method）"""
    AUTO = "auto"
    MC = "mc"
    RADIAL = "radial"


class Estimate(BaseModel):
    """数値推定値"""

    model_config = ConfigDict(frozen=True)

    value: float = Field(..., description="推定値")
    stderr: float = Field(default=0.0, ge=0.0, description="標準誤差（決定的手法では0）")
    budget: int = Field(..., ge=0, description="サンプル数または求積ノード数")
    method: EstimateMethod = Field(..., description="推定手法")

    def effective_stderr(self, floor: float) -> float:
        """判定用の標準誤差（下限付き）"""
        return max(self.stderr, floor)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "stderr": self.stderr,
            "budget": self.budget,
            "method": self.method.value,
        }


class VectorEstimate(BaseModel):
    """同一サンプルから得た複数積分の同時推定（共分散付き）"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray = Field(..., description="推定値ベクトル")
    covariance: np.ndarray = Field(..., description="推定値の共分散行列")
    budget: int = Field(..., ge=0)
    method: EstimateMethod

    @field_validator("values", "covariance", mode="before")
    @classmethod
    def _as_array(cls, v: Any) -> np.ndarray:
        arr = np.array(v, dtype=float)
        arr.flags.writeable = False
        return arr

    def component(self, index: int) -> Estimate:
        """成分を単独の Estimate として取得"""
        return Estimate(
            value=float(self.values[index]),
            stderr=math.sqrt(max(float(self.covariance[index, index]), 0.0)),
            budget=self.budget,
            method=self.method,
        )

    def propagate(self, value: float, gradient: List[float]) -> Estimate:
        """デルタ法で関数値の標準誤差を伝播"""
        g = np.asarray(gradient, dtype=float)
        variance = float(g @ self.covariance @ g)
        return Estimate(
            value=float(value),
            stderr=math.sqrt(max(variance, 0.0)),
            budget=self.budget,
            method=self.method,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "values": self.values.tolist(),
            "covariance": self.covariance.tolist(),
            "budget": self.budget,
            "method": self.method.value,
        }


class RngSpec(BaseModel):
    """カウンタベース乱数の指定 (seed, stream)"""

    model_config = ConfigDict(frozen=True)

    seed: int = Field(..., ge=0, lt=2**64, description="64ビットシード")
    stream: int = Field(default=0, ge=0, lt=2**64, description="ストリームID")

    def child(self, *path: int) -> "RngSpec":
        """独立な子ストリームを導出"""
        state = np.random.SeedSequence([self.stream, *path]).generate_state(1, np.uint64)
        return RngSpec(seed=self.seed, stream=int(state[0]))

    def bit_generator(self, block: int = 0) -> np.random.Philox:
        """ブロック番号をカウンタに載せた Philox"""
        counter = np.array([0, block, 0, 0], dtype=np.uint64)
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        return np.random.Philox(counter=counter, key=key)

    def generator(self, block: int = 0) -> np.random.Generator:
        return np.random.Generator(self.bit_generator(block))

    def to_dict(self) -> Dict[str, Any]:
        return {"seed": self.seed, "stream": self.stream}
