"""
レポートモデル

不等式チェッカー・局所形式エンジンの出力を表現します。
すべての判定は標準誤差を考慮した三値（＋前提未充足）です。
"""

from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, model_validator

from src.models.estimate import Estimate

# 判定ポリシー
HOLDS_SIGMAS = 3.0
VIOLATION_SIGMAS = 10.0


class Verdict(str, Enum):
    """判定"""
    HOLDS = "holds"
    VIOLATED = "violated"
    INCONCLUSIVE = "inconclusive"
    PRECONDITION_NOT_MET = "precondition_not_met"

    @classmethod
    def for_nonnegative(cls, value: float, stderr: float) -> "Verdict":
        """量 ≥ 0 の判定（3σ で成立、10σ 超で違反確定）"""
        if value >= -HOLDS_SIGMAS * stderr:
            return cls.HOLDS
        if abs(value) > VIOLATION_SIGMAS * stderr:
            return cls.VIOLATED
        return cls.INCONCLUSIVE

    @classmethod
    def worst(cls, verdicts: List["Verdict"]) -> "Verdict":
        """違反 > 不確定 > 成立 の順で集約（前提未充足は除外）"""
        relevant = [v for v in verdicts if v != cls.PRECONDITION_NOT_MET]
        if not relevant:
            return cls.PRECONDITION_NOT_MET
        if cls.VIOLATED in relevant:
            return cls.VIOLATED
        if cls.INCONCLUSIVE in relevant:
            return cls.INCONCLUSIVE
        return cls.HOLDS


class CheckReport(BaseModel):
    """補題レベルの不等式チェック結果"""
    name: str = Field(..., description="チェック名")
    value: Optional[Estimate] = Field(None, description="判定対象の量（向きは details[\"direction\"]）")
    verdict: Verdict = Field(..., description="判定")
    details: Dict[str, Any] = Field(default_factory=dict, description="補助量")
    message: Optional[str] = Field(None, description="補足メッセージ")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "value": self.value.to_dict() if self.value else None,
            "verdict": self.verdict.value,
            "details": self.details,
            "message": self.message,
        }


class GapReport(BaseModel):
    """p凹性ギャップ μ(M)^p − λμ(K)^p − (1−λ)μ(L)^p"""
    p: float = Field(..., ge=0.0, description="指数 p（0は対数形式）")
    lam: float = Field(..., ge=0.0, le=1.0, description="λ")
    gap: Estimate = Field(..., description="ギャップ推定")
    verdict: Verdict
    mu_K: Estimate
    mu_L: Estimate
    mu_M: Estimate
    common_random_numbers: bool = Field(default=False, description="共通乱数モード（保守的標準誤差）")
    inputs: Dict[str, Any] = Field(default_factory=dict, description="入力のエコー")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p": self.p,
            "lambda": self.lam,
            "gap": self.gap.to_dict(),
            "verdict": self.verdict.value,
            "mu_K": self.mu_K.to_dict(),
            "mu_L": self.mu_L.to_dict(),
            "mu_M": self.mu_M.to_dict(),
            "common_random_numbers": self.common_random_numbers,
            "inputs": self.inputs,
        }


class ProfileReport(BaseModel):
    """二分法による最大指数 p*"""
    lambda_grid: List[float]
    p_star: float = Field(..., description="成立する最大の p")
    p_lo: float
    p_cap: float
    tolerance: float
    tightest_lambda: Optional[float] = Field(None, description="p* で最小ギャップを与える λ")
    interval: Optional[List[float]] = Field(None, description="境界が不確定な場合の [p_ok, p_bad]")
    flagged: bool = Field(default=False, description="不確定判定で区間を返したか")
    half_verdict: Optional[Verdict] = Field(None, description="p*/2 での判定")
    gaps: List[GapReport] = Field(default_factory=list, description="p* での λ ごとのギャップ")
    bisection_steps: int = 0

    @model_validator(mode="after")
    def _check_bracket(self) -> "ProfileReport":
        if not self.p_lo <= self.p_star <= self.p_cap:
            raise ValueError(f"p_lo ≤ p* ≤ p_cap を満たしません: {self.p_star}")
        if self.flagged:
            if self.interval is None or not self.interval[0] <= self.interval[1]:
                raise ValueError("不確定判定には [p_ok, p_bad] 区間が必要です")
        elif self.p_star > 0 and self.half_verdict != Verdict.HOLDS:
            raise ValueError("p*/2 での判定が成立ではありません")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda_grid": self.lambda_grid,
            "p_star": self.p_star,
            "p_lo": self.p_lo,
            "p_cap": self.p_cap,
            "tolerance": self.tolerance,
            "tightest_lambda": self.tightest_lambda,
            "interval": self.interval,
            "flagged": self.flagged,
            "half_verdict": self.half_verdict.value if self.half_verdict else None,
            "bisection_steps": self.bisection_steps,
            "gaps": [g.to_dict() for g in self.gaps],
        }


class JensenReport(BaseModel):
    """Jensen 型下界 lhs ≥ bound"""
    epsilon: float
    R: float
    lhs: Estimate
    bound: float
    verdict: Verdict
    optimal_epsilon: float = Field(..., description="(R+1−2√R)/(R−1)")
    c_of_R: float = Field(..., description="2/(√R+1)²")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "epsilon": self.epsilon,
            "R": self.R,
            "lhs": self.lhs.to_dict(),
            "bound": self.bound,
            "verdict": self.verdict.value,
            "optimal_epsilon": self.optimal_epsilon,
            "c_of_R": self.c_of_R,
        }


class VariationReport(BaseModel):
    """変分公式と有限差分の比較"""
    order: int = Field(..., ge=1, le=2)
    formula: float
    fd: float = Field(..., description="既定ステップの有限差分")
    fd_half: float = Field(..., description="半分のステップの有限差分")
    step: float
    relative_error: float = Field(..., description="|formula − fd| / max(|fd|, |formula|, 1e−6)")
    step_halving_change: float = Field(..., description="|fd − fd_half|")

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump()


class LocalConstantReport(BaseModel):
    """局所定数 c = n(1 − μ″μ/(μ′)²)"""
    c: float
    capped: bool = Field(default=False, description="μ′ = 0 かつ μ″ ≤ 0 で上限値")
    mu: float
    first: float
    second: float
    dim: int

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump()


class BochnerReport(BaseModel):
    """1次元 Bochner 恒等式の残差"""
    R: float
    lhs: float = Field(..., description="∫(Lu)²dμ")
    bulk: float = Field(..., description="∫(u″² + u′²)dμ")
    boundary: float = Field(..., description="Σ H u′² = −2R e^{−R²/2}u′(R)²")
    residual: float = Field(..., description="|lhs − rhs| / lhs")
    beta: float = Field(..., description="bulk / lhs")

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump()
