"""
積分エンジン

μ(K) と ∫_K f dμ をシード付きモンテカルロ・動径求積・閉形式で推定します。
MC は標準ガウスを参照分布とする重要度サンプリングで、カウンタベース乱数
(Philox, key=(seed, stream), カウンタ=チャンク番号) によりワーカー数に依らず
ビット同一の結果を返します。
"""

import logging
import math
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.special import erf

from src.config import LabSettings
from src.engines.base_engine import BaseEngine, EngineCapability
from src.engines.bodies import contains_points, support_values
from src.engines.radial import build_rule, integrate_functions, integrate_measure
from src.exceptions import DimensionMismatchError, InputError
from src.models.body import BodyKind, ConvexBody
from src.models.estimate import Estimate, EstimateMethod, MethodChoice, RngSpec, VectorEstimate
from src.models.potential import Potential, PotentialKind

# ログ設定
logger = logging.getLogger(__name__)

MIN_BUDGET = 100

# None は f ≡ 1 を表す
Integrand = Optional[Callable[[np.ndarray], np.ndarray]]


class IntegrationEngine(BaseEngine):
    """積分エンジン"""

    def __init__(self, settings: Optional[LabSettings] = None):
        super().__init__(
            engine_id="integration_engine",
            name="IntegrationEngine",
            description="μ(K) とモーメント積分の推定",
            settings=settings,
        )

    def _define_capabilities(self) -> List[EngineCapability]:
        return [
            EngineCapability(
                capability_name="mu_of_body",
                description="凸体の測度 μ(K)",
                input_types=["Potential", "ConvexBody"],
                output_types=["Estimate"],
            ),
            EngineCapability(
                capability_name="moment",
                description="モーメント積分 ∫_K f dμ",
                input_types=["Potential", "ConvexBody", "callable"],
                output_types=["Estimate", "VectorEstimate"],
            ),
            EngineCapability(
                capability_name="closed_form_mu",
                description="閉形式オラクル",
                input_types=["Potential", "ConvexBody"],
                output_types=["Estimate"],
            ),
        ]

    # 公開API

    def closed_form_mu(self, P: Potential, K: ConvexBody) -> Optional[Estimate]:
        """閉形式（利用不可なら None）"""
        self._check_dims(P, K)
        value = _closed_form_value(P, K)
        if value is None:
            return None
        return Estimate(value=value, stderr=0.0, budget=0, method=EstimateMethod.CLOSED_FORM)

    def mu_of_body(
        self,
        P: Potential,
        K: ConvexBody,
        method: MethodChoice = MethodChoice.AUTO,
        budget: Optional[int] = None,
        rng: Optional[RngSpec] = None,
        directions: Optional[int] = None,
    ) -> Estimate:
        """μ(K) の推定"""
        with self.track("mu_of_body"):
            self._check_dims(P, K)
            budget = self._check_budget(budget)
            if method == MethodChoice.AUTO:
                closed = self.closed_form_mu(P, K)
                if closed is not None:
                    return closed
            vector = self._estimate(P, K, [None], method, budget, rng, directions)
            return vector.component(0)

    def moment(
        self,
        P: Potential,
        K: ConvexBody,
        f: Integrand,
        method: MethodChoice = MethodChoice.AUTO,
        budget: Optional[int] = None,
        rng: Optional[RngSpec] = None,
        directions: Optional[int] = None,
    ) -> Estimate:
        """∫_K f dμ の推定"""
        with self.track("moment"):
            self._check_dims(P, K)
            budget = self._check_budget(budget)
            return self._estimate(P, K, [f], method, budget, rng, directions).component(0)

    def moment_vector(
        self,
        P: Potential,
        K: ConvexBody,
        functions: Sequence[Integrand],
        method: MethodChoice = MethodChoice.AUTO,
        budget: Optional[int] = None,
        rng: Optional[RngSpec] = None,
        directions: Optional[int] = None,
    ) -> VectorEstimate:
        """同一サンプルによる複数積分の同時推定（共分散付き）"""
        with self.track("moment"):
            self._check_dims(P, K)
            budget = self._check_budget(budget)
            return self._estimate(P, K, list(functions), method, budget, rng, directions)

    def resolve_method(self, K: ConvexBody, method: MethodChoice) -> EstimateMethod:
        """auto を具体的な手法に解決（モーメント用）"""
        if method == MethodChoice.MC:
            return EstimateMethod.MC
        if method == MethodChoice.RADIAL:
            return EstimateMethod.RADIAL_QUADRATURE
        if K.dim <= 2 and K.contains_origin:
            return EstimateMethod.RADIAL_QUADRATURE
        return EstimateMethod.MC

    # 内部処理

    def _check_dims(self, P: Potential, K: ConvexBody) -> None:
        if P.dim != K.dim:
            raise DimensionMismatchError(f"次元が一致しません: μ は n={P.dim}, K は n={K.dim}")

    def _check_budget(self, budget: Optional[int]) -> int:
        budget = self.settings.default_budget if budget is None else int(budget)
        if budget < MIN_BUDGET:
            raise InputError(f"予算は {MIN_BUDGET} 以上である必要があります: {budget}")
        return budget

    def _estimate(
        self,
        P: Potential,
        K: ConvexBody,
        functions: List[Integrand],
        method: MethodChoice,
        budget: int,
        rng: Optional[RngSpec],
        directions: Optional[int],
    ) -> VectorEstimate:
        resolved = self.resolve_method(K, method)
        if resolved == EstimateMethod.RADIAL_QUADRATURE:
            return self._radial(P, K, functions, directions or self.settings.radial_directions)
        return self._monte_carlo(P, K, functions, budget, rng or RngSpec(seed=0))

    def _radial(self, P: Potential, K: ConvexBody, functions: List[Integrand], directions: int) -> VectorEstimate:
        rule = build_rule(K, directions)
        tol = self.settings.quadrature_abs_tol
        values = np.zeros(len(functions))
        general = [i for i, f in enumerate(functions) if f is not None]
        for i, f in enumerate(functions):
            if f is None:
                values[i] = integrate_measure(P, rule, tol)
        if general:
            values[general] = integrate_functions(P, rule, [functions[i] for i in general], tol)
        k = len(functions)
        return VectorEstimate(
            values=values,
            covariance=np.zeros((k, k)),
            budget=rule.size,
            method=EstimateMethod.RADIAL_QUADRATURE,
        )

    def _monte_carlo(
        self, P: Potential, K: ConvexBody, functions: List[Integrand], budget: int, rng: RngSpec
    ) -> VectorEstimate:
        if not P.is_normalized:
            logger.warning("正規化定数が未知のため e^{−V} の非正規化積分を推定します")
        chunk = self.settings.chunk_size
        n_chunks = math.ceil(budget / chunk)
        k = len(functions)

        def run_chunk(index: int):
            size = min(chunk, budget - index * chunk)
            X = rng.generator(block=index).standard_normal((size, P.dim))
            inside = contains_points(K, X)
            Y = np.zeros((k, size))
            if np.any(inside):
                X_in = X[inside]
                w = np.exp(P.log_weight_vs_gaussian(X_in))
                for i, f in enumerate(functions):
                    Y[i, inside] = w if f is None else w * f(X_in)
            return Y.sum(axis=1), Y @ Y.T

        results = self.parallel_map(run_chunk, range(n_chunks))
        total = np.zeros(k)
        cross = np.zeros((k, k))
        for partial_sum, partial_cross in results:
            total += partial_sum
            cross += partial_cross

        mean = total / budget
        sample_cov = (cross / budget - np.outer(mean, mean)) * budget / (budget - 1)
        return VectorEstimate(
            values=mean,
            covariance=sample_cov / budget,
            budget=budget,
            method=EstimateMethod.MC,
        )


def _closed_form_value(P: Potential, K: ConvexBody) -> Optional[float]:
    if P.kind not in (PotentialKind.GAUSSIAN, PotentialKind.DIAG_QUADRATIC):
        return None
    c = P.quadratic_coefficients()

    if K.dim == 1:
        hi = float(support_values(K, np.array([[1.0]]))[0])
        lo = -float(support_values(K, np.array([[-1.0]]))[0])
        scale = math.sqrt(0.5 * c[0])
        return 0.5 * (math.erf(hi * scale) - math.erf(lo * scale))

    if K.kind == BodyKind.BOX:
        return float(np.prod(erf(K.half_widths * np.sqrt(0.5 * c))))

    if K.kind == BodyKind.BALL and K.dim == 2 and np.allclose(c, c[0], rtol=0.0, atol=0.0):
        return float(-math.expm1(-0.5 * c[0] * K.radius**2))

    return None
