"""
局所形式エンジン

変分側の計算を行います。
- 2次元境界積分による μ(K_s) の1次・2次変分と有限差分の比較
- 局所定数 c = n(1 − μ″μ/(μ′)²) と局所不等式の残差
- 1次元ノイマン問題の閉形式解、Bochner 恒等式の残差、関数 α・β
"""

import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad, quad_vec

from src.config import LabSettings
from src.engines.base_engine import BaseEngine, EngineCapability
from src.engines.bodies import family_member, validate_family
from src.engines.integrals import IntegrationEngine
from src.exceptions import FamilyInvalidError, InputError, LogConcavityViolationError
from src.models.body import BodyFamily, ConvexBody, DirectionGrid, Perturbation
from src.models.curve import BoundaryCurve2D, CurveKind, OdeProfile, neumann_first_derivative
from src.models.estimate import Estimate, EstimateMethod, MethodChoice
from src.models.potential import Potential
from src.models.report import BochnerReport, CheckReport, LocalConstantReport, Verdict, VariationReport

# ログ設定
logger = logging.getLogger(__name__)

FIRST_STEP = 1e-4
SECOND_STEP = 1e-3
LOCAL_C_CAP = 1e6
ZERO_DERIVATIVE = 1e-12
RELATIVE_FLOOR = 1e-6


# 1次元の関数

def alpha(R: float) -> float:
    """α(R) = ∫₀ᴿ (t⁴−3t²)e^{−t²/2}dt"""
    if R < 0:
        raise InputError(f"R ≥ 0 が必要です: {R}")
    if R == 0:
        return 0.0
    points = [p for p in (1.0, math.sqrt(3.0), 3.0, 6.0) if p < R]
    value, _ = quad(lambda t: (t**4 - 3.0 * t**2) * math.exp(-0.5 * t**2), 0.0, R,
                    epsabs=1e-10, epsrel=1e-12, limit=200, points=points or None)
    return float(value)


def ode_profile(R: float, nodes: int = 201) -> OdeProfile:
    """u′ と u″ = tu′ + 1 をノード上で構成"""
    if R <= 0:
        raise InputError(f"R > 0 が必要です: {R}")
    if nodes < 3:
        raise InputError("ノード数は3以上です")
    return OdeProfile.build(R, node_count=nodes)


def _weighted(fn: Callable[[float], float], R: float) -> float:
    """∫_{−R}^{R} fn(t)e^{−t²/2}dt（fn は偶関数）"""
    value, _ = quad(lambda t: fn(t) * math.exp(-0.5 * t**2), 0.0, R, epsabs=1e-12, epsrel=1e-13, limit=200)
    return 2.0 * float(value)


def _bulk_integrand(t: float) -> float:
    first = float(neumann_first_derivative(t))
    second = t * first + 1.0
    return second**2 + first**2


def bochner_residual_1d(R: float) -> BochnerReport:
    """∫(Lu)²dμ = ∫(u″² + u′²)dμ + Σ_{±R} H u′² の相対残差"""
    if R <= 0:
        raise InputError(f"R > 0 が必要です: {R}")
    lhs = _weighted(lambda t: 1.0, R)
    bulk = _weighted(_bulk_integrand, R)
    edge = float(neumann_first_derivative(R))
    boundary = -2.0 * R * math.exp(-0.5 * R**2) * edge**2
    residual = abs(lhs - (bulk + boundary)) / lhs
    if residual > 1e-8:
        logger.warning(f"Bochner 残差が大きいです: R={R}, residual={residual:.3e}")
    return BochnerReport(R=R, lhs=lhs, bulk=bulk, boundary=boundary, residual=residual, beta=bulk / lhs)


def beta(R: float) -> float:
    """β(R) = ∫(u″² + u′²)e^{−t²/2}dt / ∫e^{−t²/2}dt"""
    if R <= 0:
        raise InputError(f"R > 0 が必要です: {R}")
    return _weighted(_bulk_integrand, R) / _weighted(lambda t: 1.0, R)


class LocalFormEngine(BaseEngine):
    """局所形式エンジン"""

    def __init__(self, settings: Optional[LabSettings] = None, integrator: Optional[IntegrationEngine] = None):
        super().__init__(
            engine_id="local_form_engine",
            name="LocalFormEngine",
            description="境界変分と1次元恒等式",
            settings=settings,
        )
        self.integrator = integrator or IntegrationEngine(self.settings)

    def _define_capabilities(self) -> List[EngineCapability]:
        return [
            EngineCapability(
                capability_name="variation",
                description="1次・2次変分（公式と有限差分）",
                input_types=["Potential", "BoundaryCurve2D", "Perturbation"],
                output_types=["VariationReport"],
            ),
            EngineCapability(
                capability_name="local_c_estimate",
                description="局所定数 c",
                input_types=["Potential", "BoundaryCurve2D", "Perturbation"],
                output_types=["LocalConstantReport"],
            ),
            EngineCapability(
                capability_name="local_form_residual",
                description="局所不等式 μ″ − ((n−C)/(nμ))(μ′)² ≤ 0",
                output_types=["CheckReport"],
            ),
            EngineCapability(
                capability_name="scan",
                description="R グリッド上の α・β・Bochner 残差",
                input_types=["list[float]"],
                output_types=["list"],
            ),
        ]

    def scan(self, fn: Callable[[float], object], grid: Sequence[float]) -> List[object]:
        """グリッド上の並列評価（順序保持）"""
        with self.track("scan"):
            return self.parallel_map(fn, [float(r) for r in grid])

    # 変分公式

    def _attach(self, P: Potential, curve: BoundaryCurve2D) -> BoundaryCurve2D:
        if P.dim != 2:
            raise InputError("変分公式は n=2 のみです")
        if curve.potential_label == P.describe() and curve.has_potential:
            return curve
        return curve.with_potential(P)

    def _psi(self, curve: BoundaryCurve2D, psi: Perturbation) -> np.ndarray:
        grid = DirectionGrid.circle(curve.size)
        return psi.on_grid(grid)

    def first_formula(self, P: Potential, curve: BoundaryCurve2D, psi: Perturbation) -> float:
        """μ′(0) = ∫_{∂K} ψ(n_x) dμ_∂K"""
        curve = self._attach(P, curve)
        return float(self._psi(curve, psi) @ curve.weights)

    def second_formula(self, P: Potential, curve: BoundaryCurve2D, psi: Perturbation) -> float:
        """μ″(0) = ∫_{∂K}(H f² − ρ(df/ds)²)dμ_∂K（多角形は頂点項つき）"""
        curve = self._attach(P, curve)
        f = self._psi(curve, psi)
        if curve.kind == CurveKind.ANALYTIC:
            f_prime = psi.derivative_at(curve.angles)
            return float(np.sum((curve.mean_curvature * f**2 - f_prime**2 / curve.rho) * curve.weights))

        delta = curve.delta
        f_next = np.roll(f, -1)
        corner = (2.0 * f * f_next - math.cos(delta) * (f**2 + f_next**2)) / math.sin(delta)
        return float(-np.sum(f**2 * curve.normal_flux) + np.sum(curve.vertex_density * corner))

    # 有限差分

    def _measure_along(self, P: Potential, curve: BoundaryCurve2D, psi: Perturbation, steps: Sequence[float]) -> List[float]:
        """μ(K_s)（解析曲線は滑らかな扇形積分、多角形は動径求積）"""
        if curve.kind == CurveKind.ANALYTIC:
            return [self._smooth_measure(P, curve, psi, s) for s in steps]

        grid = DirectionGrid.circle(curve.size)
        base = ConvexBody.support_grid(grid, curve.support)
        reach = max(abs(s) for s in steps)
        family = BodyFamily(base=base, perturbation=psi, s_min=-reach, s_max=reach)
        validate_family(family, curve.rho_min)
        return self.parallel_map(
            lambda s: self.integrator.mu_of_body(
                P, family_member(family, s), method=MethodChoice.RADIAL,
                directions=self.settings.radial_directions,
            ).value,
            list(steps),
        )

    def _smooth_measure(self, P: Potential, curve: BoundaryCurve2D, psi: Perturbation, s: float) -> float:
        """μ(K_s) = ∫ h_s ρ_s ∫₀¹ t e^{−V(t x_s(θ))} dt dθ / Z"""
        theta = curve.angles
        U = curve.normals
        U_perp = np.column_stack([-np.sin(theta), np.cos(theta)])
        h_prime = np.sum(curve.points * U_perp, axis=1)

        f = psi.at(theta)
        h_s = curve.support + s * f
        hp_s = h_prime + s * psi.derivative_at(theta)
        rho_s = curve.rho + s * (f + psi.second_derivative_at(theta))
        if np.min(rho_s) < curve.rho_min:
            raise FamilyInvalidError(s, f"(min ρ={float(np.min(rho_s)):.3e})")
        X = h_s[:, None] * U + hp_s[:, None] * U_perp

        if P.is_quadratic:
            q = (X**2) @ P.quadratic_coefficients()
            inner = np.where(q > 1e-300, -np.expm1(-0.5 * q) / np.maximum(q, 1e-300), 0.5) / P.normalizer()
        else:
            log_z = P.log_normalizer or 0.0
            inner, _ = quad_vec(
                lambda t: t * np.exp(-P.eval(t * X) - log_z), 0.0, 1.0,
                epsabs=self.settings.quadrature_abs_tol, epsrel=1e-12, norm="max",
            )
        return float(np.sum(h_s * rho_s * inner) * curve.delta)

    def _variation(
        self, P: Potential, curve: BoundaryCurve2D, psi: Perturbation, order: int, step: Optional[float]
    ) -> VariationReport:
        step = step if step is not None else (FIRST_STEP if order == 1 else SECOND_STEP)
        formula = self.first_formula(P, curve, psi) if order == 1 else self.second_formula(P, curve, psi)

        def difference(h: float) -> float:
            if order == 1:
                plus, minus = self._measure_along(P, curve, psi, [h, -h])
                return (plus - minus) / (2.0 * h)
            plus, centre, minus = self._measure_along(P, curve, psi, [h, 0.0, -h])
            return (plus - 2.0 * centre + minus) / h**2

        fd = difference(step)
        fd_half = difference(0.5 * step)
        relative = abs(formula - fd) / max(abs(fd), abs(formula), RELATIVE_FLOOR)
        if relative > 1e-3:
            logger.warning(f"{order}次変分の公式と有限差分が一致しません: formula={formula:.6e}, fd={fd:.6e}")
        return VariationReport(
            order=order, formula=formula, fd=fd, fd_half=fd_half, step=step,
            relative_error=relative, step_halving_change=abs(fd - fd_half),
        )

    def first_variation_2d(
        self, P: Potential, curve: BoundaryCurve2D, psi: Perturbation, step: Optional[float] = None
    ) -> VariationReport:
        with self.track("variation"):
            return self._variation(P, curve, psi, 1, step)

    def second_variation_2d(
        self, P: Potential, curve: BoundaryCurve2D, psi: Perturbation, step: Optional[float] = None
    ) -> VariationReport:
        with self.track("variation"):
            return self._variation(P, curve, psi, 2, step)

    # 局所定数

    def _derivatives(self, P: Potential, curve: BoundaryCurve2D, psi: Perturbation) -> Tuple[float, float, float]:
        mu = self._measure_along(P, curve, psi, [0.0])[0]
        return mu, self.first_formula(P, curve, psi), self.second_formula(P, curve, psi)

    def local_c_estimate(self, P: Potential, curve: BoundaryCurve2D, psi: Perturbation) -> LocalConstantReport:
        """μ″μ ≤ ((n−c)/n)(μ′)² を満たす最大の c"""
        with self.track("local_c_estimate"):
            n = 2
            mu, first, second = self._derivatives(P, curve, psi)
            if abs(first) <= ZERO_DERIVATIVE:
                if second > ZERO_DERIVATIVE:
                    raise LogConcavityViolationError(first, second)
                return LocalConstantReport(c=LOCAL_C_CAP, capped=True, mu=mu, first=first, second=second, dim=n)
            c = n * (1.0 - second * mu / first**2)
            return LocalConstantReport(c=c, mu=mu, first=first, second=second, dim=n)

    def local_form_residual(self, P: Potential, curve: BoundaryCurve2D, psi: Perturbation, C: float) -> CheckReport:
        """μ″ − ((n−C)/(nμ))(μ′)² ≤ 0"""
        with self.track("local_form_residual"):
            n = 2
            mu, first, second = self._derivatives(P, curve, psi)
            residual = second - (n - C) / (n * mu) * first**2
            value = Estimate(
                value=residual, stderr=0.0, budget=curve.size, method=EstimateMethod.RADIAL_QUADRATURE,
            )
            verdict = Verdict.for_nonnegative(-residual, self.settings.verdict_floor)
            return CheckReport(
                name="local_form", value=value, verdict=verdict,
                details={"direction": "<=0", "C": C, "mu": mu, "first": first, "second": second},
            )
