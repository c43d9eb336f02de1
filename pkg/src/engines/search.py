"""
反例探索エンジン

凸体ペア (K, L) の探索空間上で、λグリッドの最小ギャップまたは経験的 p* を
Nelder–Mead（シード付きリスタート）で最小化します。各候補は (リスタート, 評価番号)
から導出した固定シードで評価するため、目的関数は決定的なノイズ付き地形になります。
"""

import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from src.config import LabSettings
from src.engines.base_engine import BaseEngine, EngineCapability
from src.engines.bodies import default_harmonic_orders, harmonic_body
from src.engines.inequalities import (
    DEFAULT_LAMBDA_GRID,
    DEFAULT_TOL,
    ORIGIN_LOWER_CONSTANT,
    ORIGIN_UPPER_CONSTANT,
    InequalityChecker,
)
from src.exceptions import InputError, LabError, SearchDegenerateError
from src.models.body import ConvexBody, DirectionGrid
from src.models.estimate import MethodChoice, RngSpec
from src.models.potential import Potential
from src.models.report import Verdict
from src.models.search import (
    OptimizerConfig,
    Parametrization,
    SearchClass,
    SearchObjective,
    SearchResult,
    SearchSpace,
    TrajectoryEntry,
)

# ログ設定
logger = logging.getLogger(__name__)

# 評価失敗時のペナルティ
FAILED_PENALTY = 1e3
# 再検証ストリーム
VERIFICATION_STREAM = 2**20


# 探索空間の構成

def harmonic_space(
    body_class: SearchClass,
    orders: Optional[Sequence[int]] = None,
    grid_size: int = 720,
    amplitude: float = 0.6,
    a0_range: Tuple[float, float] = (0.2, 3.0),
    h_min: float = 0.05,
    rho_min: float = 1e-3,
) -> SearchSpace:
    """n=2 の調和係数空間（1体あたり a₀ と (aₖ, bₖ)）"""
    symmetric = body_class == SearchClass.SYM
    orders = list(orders) if orders is not None else default_harmonic_orders(symmetric)
    if symmetric and any(k % 2 for k in orders):
        raise InputError(f"sym クラスは偶数次のみです: {orders}")
    scale = np.repeat([amplitude / k for k in orders], 2)
    return SearchSpace(
        body_class=body_class,
        dim=2,
        parametrization=Parametrization.HARMONIC,
        harmonic_orders=orders,
        grid_size=grid_size,
        lower=np.concatenate([[a0_range[0]], -scale]),
        upper=np.concatenate([[a0_range[1]], scale]),
        h_min=h_min,
        rho_min=rho_min,
    )


def interval_space(body_class: SearchClass, h_min: float = 0.05, h_max: float = 5.0) -> SearchSpace:
    """n=1 の区間（sym: [−a, a]、origin: [−a, b]）"""
    size = 1 if body_class == SearchClass.SYM else 2
    return SearchSpace(
        body_class=body_class,
        dim=1,
        parametrization=Parametrization.INTERVAL,
        lower=np.full(size, h_min),
        upper=np.full(size, h_max),
        h_min=h_min,
    )


def fan_space(
    body_class: SearchClass,
    dim: int,
    facets: int = 12,
    seed: int = 0,
    h_min: float = 0.05,
    h_max: float = 2.0,
) -> SearchSpace:
    """法線扇を固定した H多面体（±eᵢ を含むので常に有界）"""
    if dim not in (2, 3):
        raise InputError(f"fixed_fan は n ∈ {{2, 3}} のみです: {dim}")
    gen = RngSpec(seed=seed).generator()
    if body_class == SearchClass.SYM:
        extra = max(facets // 2 - dim, 0)
        raw = gen.standard_normal((extra, dim))
        normals = np.vstack([np.eye(dim), raw / np.linalg.norm(raw, axis=1, keepdims=True)])
        size = normals.shape[0]
        lower = np.full(size, max(h_min, 0.3))
    else:
        extra = max(facets - 2 * dim, 0)
        raw = gen.standard_normal((extra, dim))
        normals = np.vstack([np.eye(dim), -np.eye(dim), raw / np.linalg.norm(raw, axis=1, keepdims=True)])
        size = normals.shape[0]
        lower = np.full(size, h_min)
    return SearchSpace(
        body_class=body_class,
        dim=dim,
        parametrization=Parametrization.FIXED_FAN,
        normals=normals,
        lower=lower,
        upper=np.full(size, h_max),
        h_min=h_min,
    )


def default_space(body_class: SearchClass, dim: int) -> SearchSpace:
    """次元ごとの既定空間"""
    if dim == 1:
        return interval_space(body_class)
    if dim == 2:
        return harmonic_space(body_class)
    return fan_space(body_class, dim)


# デコード

def decode_body(space: SearchSpace, x: np.ndarray, grid: Optional[DirectionGrid] = None) -> ConvexBody:
    """1体分のパラメータを凸体へ（境界でクランプ済みを想定）"""
    symmetric = space.body_class == SearchClass.SYM
    if space.parametrization == Parametrization.INTERVAL:
        a = float(x[0])
        b = a if symmetric else float(x[1])
        return ConvexBody.hpolytope(
            np.array([[1.0], [-1.0]]), np.array([b, a]), is_symmetric=symmetric or None
        )
    if space.parametrization == Parametrization.FIXED_FAN:
        if symmetric:
            normals = np.vstack([space.normals, -space.normals])
            return ConvexBody.hpolytope(normals, np.concatenate([x, x]), is_symmetric=True)
        return ConvexBody.hpolytope(space.normals, np.asarray(x, dtype=float))
    grid = grid or DirectionGrid.circle(space.grid_size)
    return harmonic_body(
        float(x[0]),
        np.asarray(x[1:], dtype=float),
        space.harmonic_orders,
        grid,
        symmetric=symmetric,
        h_min=space.h_min,
        rho_min=space.rho_min,
    )


def decode_pair(
    space: SearchSpace, x: np.ndarray, grid: Optional[DirectionGrid] = None
) -> Tuple[ConvexBody, ConvexBody]:
    """(K, L) をデコード（クランプ後に検証）"""
    clamped = space.clamp(x)
    half = space.body_dimension
    if space.parametrization == Parametrization.HARMONIC and grid is None:
        grid = DirectionGrid.circle(space.grid_size)
    return decode_body(space, clamped[:half], grid), decode_body(space, clamped[half:], grid)


class CounterexampleSearch(BaseEngine):
    """反例探索エンジン"""

    def __init__(self, settings: Optional[LabSettings] = None, checker: Optional[InequalityChecker] = None):
        super().__init__(
            engine_id="counterexample_search",
            name="CounterexampleSearch",
            description="低い p凹性を与える凸体ペアの探索",
            settings=settings,
        )
        self.checker = checker or InequalityChecker(self.settings)

    def _define_capabilities(self) -> List[EngineCapability]:
        return [
            EngineCapability(
                capability_name="search_min_gap",
                description="固定 p での最小ギャップ探索",
                input_types=["Potential", "SearchSpace"],
                output_types=["SearchResult"],
            ),
            EngineCapability(
                capability_name="search_profile",
                description="経験的 p* の最小化",
                input_types=["Potential", "SearchSpace"],
                output_types=["SearchResult"],
            ),
        ]

    def _check_space(self, P: Potential, space: SearchSpace) -> None:
        if P.dim != space.dim:
            raise InputError(f"ポテンシャルの次元 {P.dim} と探索空間の次元 {space.dim} が一致しません")

    def _run(
        self,
        evaluate: Callable[[ConvexBody, ConvexBody, RngSpec], Tuple[float, float]],
        space: SearchSpace,
        config: OptimizerConfig,
        rng: RngSpec,
    ) -> Tuple[List[Tuple[float, float, np.ndarray, int]], List[TrajectoryEntry]]:
        grid = DirectionGrid.circle(space.grid_size) if space.parametrization == Parametrization.HARMONIC else None
        lo = np.array([b[0] for b in space.bounds()])
        hi = np.array([b[1] for b in space.bounds()])
        per_restart = config.evaluations_per_restart

        def run_restart(restart: int):
            start = rng.child(restart).generator().uniform(lo, hi)
            log: List[TrajectoryEntry] = []
            best = {"objective": math.inf, "stderr": 0.0, "x": start}

            def fun(x: np.ndarray) -> float:
                index = len(log)
                try:
                    K, L = decode_pair(space, x, grid)
                    value, stderr = evaluate(K, L, rng.child(restart, index))
                    failed = False
                except LabError as e:
                    logger.debug(f"候補の評価に失敗: restart={restart}, eval={index}: {e}")
                    value, stderr, failed = FAILED_PENALTY, 0.0, True
                if not failed and value < best["objective"]:
                    best.update(objective=value, stderr=stderr, x=space.clamp(x))
                log.append(TrajectoryEntry(
                    restart=restart, evaluation=index, objective=value, stderr=stderr,
                    best_so_far=best["objective"], failed=failed,
                ))
                return value

            minimize(
                fun, start, method="Nelder-Mead", bounds=space.bounds(),
                options={"maxfev": per_restart, "xatol": config.xatol, "fatol": config.fatol, "adaptive": True},
            )
            return (best["objective"], best["stderr"], best["x"], restart), log

        outcomes = self.parallel_map(run_restart, range(config.restarts))
        bests = [o[0] for o in outcomes]
        trajectory = [entry for o in outcomes for entry in o[1]]
        if all(entry.failed for entry in trajectory):
            raise SearchDegenerateError(f"全リスタート ({config.restarts}) の評価が失敗しました")
        return bests, trajectory

    def _pick(self, bests: List[Tuple[float, float, np.ndarray, int]]) -> Tuple[float, float, np.ndarray, int]:
        # 目的値、同値ならリスタート番号
        return min((b for b in bests if math.isfinite(b[0])), key=lambda b: (b[0], b[3]))

    def search_min_gap(
        self,
        P: Potential,
        space: SearchSpace,
        p: float,
        lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
        config: Optional[OptimizerConfig] = None,
        method: MethodChoice = MethodChoice.AUTO,
        budget: Optional[int] = None,
        rng: Optional[RngSpec] = None,
    ) -> SearchResult:
        """λグリッド上の最小ギャップを最小化し、負の最良値は10倍予算で再検証"""
        with self.track("search_min_gap"):
            if p <= 0:
                raise InputError(f"p > 0 が必要です: {p}")
            self._check_space(P, space)
            config = config or OptimizerConfig()
            rng = rng or RngSpec(seed=0)
            budget = budget or self.settings.default_budget

            def evaluate(K: ConvexBody, L: ConvexBody, stream: RngSpec) -> Tuple[float, float]:
                report = self.checker.min_gap(P, K, L, p, lambda_grid, method=method, budget=budget, rng=stream)
                return report.gap.value, report.gap.stderr

            logger.info(f"最小ギャップ探索開始: class={space.body_class.value}, p={p}, restarts={config.restarts}")
            bests, trajectory = self._run(evaluate, space, config, rng)
            value, stderr, x, restart = self._pick(bests)
            K, L = decode_pair(space, x)

            verification = []
            certified = False
            if value < 0:
                factor = config.verification_factor
                mu_K, mu_L, mu_M = self.checker.measure_grid(
                    P, K, L, lambda_grid, method=method, budget=budget * factor,
                    rng=rng.child(VERIFICATION_STREAM), directions=self.settings.radial_directions * factor,
                )
                verification = [
                    self.checker.gap_from_estimates(lam, p, mu_K, mu_L, m) for lam, m in zip(lambda_grid, mu_M)
                ]
                certified = any(r.verdict == Verdict.VIOLATED for r in verification)
                if certified:
                    logger.warning(f"再検証済みの違反を発見: p={p}, gap={min(r.gap.value for r in verification):.3e}")

            return SearchResult(
                objective=SearchObjective.MIN_GAP,
                best_parameters=[float(v) for v in x],
                best_objective=value,
                best_stderr=stderr,
                best_restart=restart,
                evaluations=len(trajectory),
                failed_evaluations=sum(1 for t in trajectory if t.failed),
                seed=rng.seed,
                p=p,
                certified_violation=certified,
                verification=verification,
                best_pair={"K": K.to_dict(), "L": L.to_dict()},
                trajectory=trajectory,
                space=space.to_dict(),
            )

    def search_profile(
        self,
        P: Potential,
        space: SearchSpace,
        lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
        config: Optional[OptimizerConfig] = None,
        method: MethodChoice = MethodChoice.AUTO,
        budget: Optional[int] = None,
        rng: Optional[RngSpec] = None,
        p_cap: float = 4.0,
        tol: float = DEFAULT_TOL,
    ) -> SearchResult:
        """経験的 p* を空間上で最小化"""
        with self.track("search_profile"):
            self._check_space(P, space)
            config = config or OptimizerConfig()
            rng = rng or RngSpec(seed=0)
            budget = budget or self.settings.default_budget

            def evaluate(K: ConvexBody, L: ConvexBody, stream: RngSpec) -> Tuple[float, float]:
                report = self.checker.profile_p_star(
                    P, K, L, lambda_grid, p_cap=p_cap, tol=tol, method=method, budget=budget, rng=stream
                )
                return report.p_star, 0.0

            logger.info(f"p* 探索開始: class={space.body_class.value}, restarts={config.restarts}")
            bests, trajectory = self._run(evaluate, space, config, rng)
            value, stderr, x, restart = self._pick(bests)
            K, L = decode_pair(space, x)

            consistent: Optional[bool] = None
            if space.body_class == SearchClass.ORIGIN and space.dim == 2:
                consistent = value >= ORIGIN_LOWER_CONSTANT - tol
                logger.info(
                    f"最小 p*={value:.4f}（区間 [{ORIGIN_LOWER_CONSTANT}, {ORIGIN_UPPER_CONSTANT:.3f}] との整合: {consistent}）"
                )

            return SearchResult(
                objective=SearchObjective.P_STAR,
                best_parameters=[float(v) for v in x],
                best_objective=value,
                best_stderr=stderr,
                best_restart=restart,
                evaluations=len(trajectory),
                failed_evaluations=sum(1 for t in trajectory if t.failed),
                seed=rng.seed,
                best_pair={"K": K.to_dict(), "L": L.to_dict()},
                upper_constant_consistent=consistent,
                trajectory=trajectory,
                space=space.to_dict(),
            )
