"""
受け入れスイート実行

YAML のスイート（基準番号・名前・実行時間目標・パラメータ）を読み込み、
各基準をハンドラで評価して合否と実行時間を報告します。
"""

import logging
import math
import time
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field
from rich.console import Console
from rich.table import Table

from src.config import LabSettings
from src.engines.bodies import (
    boundary_curve_2d,
    interval,
    random_fan_pair,
    random_harmonic_body,
    random_origin_hpolytope,
    random_symmetric_hpolytope,
    smoothed_square,
    whole_space_proxy,
)
from src.engines.inequalities import InequalityChecker, c_of_R
from src.engines.integrals import IntegrationEngine
from src.engines.localform import LocalFormEngine, alpha, beta, bochner_residual_1d
from src.engines.measures import make_diag_quadratic, make_gaussian
from src.engines.search import CounterexampleSearch, harmonic_space
from src.exceptions import InputError, PreconditionError
from src.interfaces.spec_loader import load_suite, parse_grid
from src.models.body import ConvexBody, DirectionGrid, Perturbation
from src.models.estimate import MethodChoice, RngSpec
from src.models.report import Verdict
from src.models.search import OptimizerConfig, SearchClass

# ログ設定
logger = logging.getLogger(__name__)

SUITE_DIR = Path(__file__).parent / "suites"
MIN_SCALED_BUDGET = 1000


class CriterionStatus(str, Enum):
    """基準の結果"""
    PASSED = "passed"
    FAILED = "failed"
    INCONCLUSIVE = "inconclusive"


class CriterionResult(BaseModel):
    """1基準の結果"""
    criterion: int
    name: str
    status: CriterionStatus
    verdict: Optional[Verdict] = Field(None, description="集約判定（判定を伴う基準のみ）")
    value: Optional[float] = Field(None, description="代表値")
    details: Dict[str, Any] = Field(default_factory=dict)
    wall_time_s: Optional[float] = None
    target_s: float = Field(..., description="実行時間目標（秒）")

    @property
    def within_target(self) -> Optional[bool]:
        return None if self.wall_time_s is None else self.wall_time_s <= self.target_s

    def to_row(self) -> Dict[str, Any]:
        return {
            "criterion": self.criterion,
            "name": self.name,
            "status": self.status,
            "verdict": self.verdict,
            "value": self.value,
            "wall_time_s": self.wall_time_s,
            "target_s": self.target_s,
        }

    def to_dict(self) -> Dict[str, Any]:
        data = self.to_row()
        data["status"] = self.status.value
        data["verdict"] = self.verdict.value if self.verdict else None
        data["within_target"] = self.within_target
        data["details"] = self.details
        return data


def _status(ok: bool) -> CriterionStatus:
    return CriterionStatus.PASSED if ok else CriterionStatus.FAILED


def _suite_status(verdicts: List[Verdict]) -> CriterionStatus:
    """「違反ゼロ」型の基準"""
    return CriterionStatus.FAILED if Verdict.VIOLATED in verdicts else CriterionStatus.PASSED


def _tally(verdicts: List[Verdict]) -> Dict[str, int]:
    return {v.value: verdicts.count(v) for v in Verdict if v in verdicts}


class AcceptanceRunner:
    """受け入れスイートの実行器"""

    def __init__(self, settings: LabSettings, seed: int = 0):
        """
        実行器を初期化

        Args:
            settings: 実行時設定
            seed: 全基準の乱数シード
        """
        self.settings = settings
        self.rng = RngSpec(seed=seed)
        self.integrator = IntegrationEngine(settings)
        self.checker = InequalityChecker(settings, self.integrator)
        self.local = LocalFormEngine(settings, self.integrator)
        self.searcher = CounterexampleSearch(settings, self.checker)
        self.handlers: Dict[str, Callable[[Dict[str, Any], float, RngSpec], Dict[str, Any]]] = {
            "c_of_R": self._c_of_R,
            "est2_integral": self._est2_integral,
            "jensen_bound": self._jensen_bound,
            "alpha_suite": self._alpha_suite,
            "beta_suite": self._beta_suite,
            "bochner": self._bochner,
            "variations": self._variations,
            "origin_exponent_suite": self._origin_exponent_suite,
            "ratio_exponent_suite": self._ratio_exponent_suite,
            "lemma_suites": self._lemma_suites,
            "dimension_one_profile": self._dimension_one_profile,
            "dilate_concavity": self._dilate_concavity,
            "search_guard": self._search_guard,
        }

    # 実行

    def resolve(self, suite: str) -> Path:
        path = Path(suite)
        if path.suffix in (".yaml", ".yml"):
            return path
        return SUITE_DIR / f"{suite}.yaml"

    def run(self, suite: str, only: Optional[List[int]] = None, scale: float = 1.0) -> List[CriterionResult]:
        """スイートを実行（only 指定時はその番号のみ）"""
        data = load_suite(str(self.resolve(suite)))
        criteria = data["criteria"]
        known = {int(c["id"]) for c in criteria}
        if only:
            unknown = sorted(set(only) - known)
            if unknown:
                raise InputError(f"不明な基準番号です: {unknown}")
        results = []
        for entry in criteria:
            cid = int(entry["id"])
            if only and cid not in only:
                continue
            results.append(self.run_criterion(entry, scale))
        return results

    def run_criterion(self, entry: Dict[str, Any], scale: float) -> CriterionResult:
        cid = int(entry["id"])
        handler_name = entry["handler"]
        if handler_name not in self.handlers:
            raise InputError(f"不明なハンドラです: {handler_name}")
        logger.info(f"基準 {cid} ({entry['name']}) を実行中")
        started = time.perf_counter()
        outcome = self.handlers[handler_name](entry.get("params") or {}, scale, self.rng.child(cid))
        elapsed = time.perf_counter() - started
        result = CriterionResult(
            criterion=cid,
            name=entry["name"],
            target_s=float(entry["target_s"]),
            wall_time_s=None if self.settings.reproducible_reports else round(elapsed, 3),
            **outcome,
        )
        if result.within_target is False:
            logger.warning(f"基準 {cid} が実行時間目標を超過: {elapsed:.1f}s > {result.target_s}s")
        return result

    def display(self, results: List[CriterionResult], console: Console) -> None:
        """結果表"""
        table = Table(title="Acceptance Criteria")
        table.add_column("#", style="cyan")
        table.add_column("Name")
        table.add_column("Status")
        table.add_column("Value")
        table.add_column("Time (s)")
        table.add_column("Target (s)")
        styles = {CriterionStatus.PASSED: "green", CriterionStatus.FAILED: "red", CriterionStatus.INCONCLUSIVE: "yellow"}
        for r in results:
            value = "-" if r.value is None else f"{r.value:.6g}"
            elapsed = "-" if r.wall_time_s is None else f"{r.wall_time_s:.2f}"
            table.add_row(str(r.criterion), r.name, f"[{styles[r.status]}]{r.status.value}[/]", value, elapsed, f"{r.target_s:g}")
        console.print(table)

    # 倍率

    def _count(self, n: int, scale: float) -> int:
        return max(1, int(round(n * scale)))

    def _budget(self, scale: float) -> int:
        return max(MIN_SCALED_BUDGET, int(self.settings.default_budget * scale))

    # 基準ハンドラ

    def _c_of_R(self, params: Dict[str, Any], scale: float, rng: RngSpec) -> Dict[str, Any]:
        grid = np.linspace(1.0, float(params.get("R_max", 25.0)), int(params.get("grid_points", 100)))
        values = [c_of_R(float(R)) for R in grid]
        exact = c_of_R(1.0) == 0.5 and c_of_R(4.0) == 2.0 / 9.0
        decreasing = all(b < a for a, b in zip(values, values[1:]))
        return {
            "status": _status(exact and decreasing),
            "value": c_of_R(4.0),
            "details": {"exact_values": exact, "strictly_decreasing": decreasing},
        }

    def _est2_integral(self, params: Dict[str, Any], scale: float, rng: RngSpec) -> Dict[str, Any]:
        target = float(params.get("target", 0.298))
        P, K = make_gaussian(2), whole_space_proxy(2)
        f = lambda x: 1.0 / (np.sum(x**2, axis=1) + 2.0)
        radial = self.integrator.moment(P, K, f, method=MethodChoice.RADIAL)
        mc = self.integrator.moment(P, K, f, method=MethodChoice.MC, budget=self._budget(scale), rng=rng)
        ok = abs(radial.value - target) <= params.get("radial_tol", 0.002) and abs(mc.value - target) <= params.get("mc_tol", 0.003)
        return {
            "status": _status(ok),
            "value": radial.value,
            "details": {"radial": radial.to_dict(), "mc": mc.to_dict()},
        }

    def _jensen_bound(self, params: Dict[str, Any], scale: float, rng: RngSpec) -> Dict[str, Any]:
        P, K = make_gaussian(2), whole_space_proxy(2)
        report = self.checker.jensen_lower_bound(P, K, 0.0, method=MethodChoice.RADIAL)
        reference = self.integrator.moment(
            P, K, lambda x: 1.0 / (np.sum(x**2, axis=1) + 2.0), method=MethodChoice.RADIAL
        )
        matches = abs(report.lhs.value - 2.0 * reference.value) <= float(params.get("tol", 1e-6))
        ok = report.lhs.value >= report.bound and matches
        return {"status": _status(ok), "verdict": report.verdict, "value": report.lhs.value, "details": report.to_dict()}

    def _alpha_suite(self, params: Dict[str, Any], scale: float, rng: RngSpec) -> Dict[str, Any]:
        grid = parse_grid(params.get("grid", "0:6:0.1"))
        values = self.local.scan(alpha, grid)
        argmin = grid[int(np.argmin(values))]
        checks = {
            "alpha_0": abs(alpha(0.0)) <= 1e-10,
            "alpha_50": abs(alpha(50.0)) <= 1e-8,
            "nonpositive": max(values) <= 1e-10,
            "argmin_near_sqrt3": abs(argmin - math.sqrt(3.0)) <= 0.05,
        }
        return {"status": _status(all(checks.values())), "value": argmin, "details": checks}

    def _beta_suite(self, params: Dict[str, Any], scale: float, rng: RngSpec) -> Dict[str, Any]:
        grid = parse_grid(params.get("grid", "0.1:6:0.1"))
        values = self.local.scan(beta, grid)
        checks = {
            "limit_at_zero": abs(beta(0.01) - 1.0) <= 1e-3,
            "strictly_increasing": all(b > a for a, b in zip(values, values[1:])),
            # 10倍は控えめな目安
            "fast_growth": beta(6.0) > 10.0 * beta(0.5),
        }
        return {"status": _status(all(checks.values())), "value": beta(1.0), "details": checks}

    def _bochner(self, params: Dict[str, Any], scale: float, rng: RngSpec) -> Dict[str, Any]:
        radii = [float(r) for r in params.get("R", [0.5, 1.0, 2.0, 3.0])]
        reports = self.local.scan(bochner_residual_1d, radii)
        worst = max(r.residual for r in reports)
        return {
            "status": _status(worst <= 1e-8),
            "value": worst,
            "details": {"reports": [r.to_dict() for r in reports]},
        }

    def _variations(self, params: Dict[str, Any], scale: float, rng: RngSpec) -> Dict[str, Any]:
        P = make_gaussian(2)
        grid = DirectionGrid.circle(int(params.get("grid_size", 720)))
        disc = []
        for r in params.get("radii", [0.5, 1.0, 2.0]):
            curve = boundary_curve_2d(ConvexBody.ball(r), size=grid.size).with_potential(P)
            one = Perturbation.constant(grid)
            first = self.local.first_formula(P, curve, one)
            second = self.local.second_formula(P, curve, one)
            disc.append({
                "r": r,
                "first_error": abs(first - r * math.exp(-0.5 * r**2)),
                "second_error": abs(second - (1.0 - r**2) * math.exp(-0.5 * r**2)),
            })
        bodies = {"ellipse(2,1)": ConvexBody.ellipsoid([2.0, 1.0]), "smoothed-square(0.1)": smoothed_square(0.1, size=grid.size)}
        perturbations = {"one": Perturbation.constant(grid), "cos:2": Perturbation.harmonic(grid, 2)}
        fd = []
        for body_name, body in bodies.items():
            curve = boundary_curve_2d(body, size=grid.size).with_potential(P)
            for psi_name, psi in perturbations.items():
                for order in (1, 2):
                    report = (self.local.first_variation_2d if order == 1 else self.local.second_variation_2d)(P, curve, psi)
                    fd.append({"body": body_name, "psi": psi_name, **report.to_dict()})
        disc_ok = all(d["first_error"] <= 1e-6 and d["second_error"] <= 1e-6 for d in disc)
        fd_ok = all(d["relative_error"] <= 1e-3 for d in fd)
        return {
            "status": _status(disc_ok and fd_ok),
            "value": max(d["relative_error"] for d in fd),
            "details": {"disc": disc, "finite_difference": fd},
        }

    def _pair_verdicts(
        self, P, pairs: List[tuple], p: float, lambdas: List[float], method: MethodChoice, budget: int, rng: RngSpec
    ) -> List[Verdict]:
        def evaluate(item):
            index, (K, L) = item
            reports = self.checker.gaps_over_grid(P, K, L, p, lambdas, method=method, budget=budget, rng=rng.child(index))
            return [r.verdict for r in reports]

        nested = self.checker.parallel_map(evaluate, list(enumerate(pairs)))
        return [v for group in nested for v in group]

    def _origin_exponent_suite(self, params: Dict[str, Any], scale: float, rng: RngSpec) -> Dict[str, Any]:
        lambdas = [float(l) for l in params.get("lambdas", [0.25, 0.5, 0.75])]
        budget = self._budget(scale)
        details: Dict[str, Any] = {}
        verdicts: List[Verdict] = []
        for label, symmetric in (("sym", True), ("origin", False)):
            count = self._count(int(params.get(f"{label}_pairs", 50)), scale)
            stream = rng.child(1 if symmetric else 2)
            pairs = []
            for i in range(count):
                gen = stream.child(i).generator()
                pairs.append((random_harmonic_body(gen, symmetric), random_harmonic_body(gen, symmetric)))
            group = self._pair_verdicts(make_gaussian(2), pairs, 0.25, lambdas, MethodChoice.AUTO, budget, stream)
            details[f"n2_{label}"] = _tally(group)
            verdicts += group

        count = self._count(int(params.get("n3_pairs", 20)), scale)
        stream = rng.child(3)
        pairs = [random_fan_pair(stream.child(i).generator(), 3, symmetric=False) for i in range(count)]
        group = self._pair_verdicts(make_gaussian(3), pairs, 1.0 / 6.0, lambdas, MethodChoice.MC, budget, stream)
        details["n3_origin"] = _tally(group)
        verdicts += group
        return {"status": _suite_status(verdicts), "verdict": Verdict.worst(verdicts), "details": details}

    def _ratio_exponent_suite(self, params: Dict[str, Any], scale: float, rng: RngSpec) -> Dict[str, Any]:
        P = make_diag_quadratic(params.get("coefficients", [1.0, 4.0]))
        p = c_of_R(P.ratio) / P.dim
        lambdas = [float(l) for l in params.get("lambdas", [0.25, 0.5, 0.75])]
        count = self._count(int(params.get("pairs", 30)), scale)
        pairs = []
        for i in range(count):
            gen = rng.child(i).generator()
            pairs.append((random_harmonic_body(gen, True), random_harmonic_body(gen, True)))
        verdicts = self._pair_verdicts(P, pairs, p, lambdas, MethodChoice.AUTO, self._budget(scale), rng)
        return {
            "status": _suite_status(verdicts),
            "verdict": Verdict.worst(verdicts),
            "value": p,
            "details": {"R": P.ratio, "p": p, "verdicts": _tally(verdicts)},
        }

    def _run_checks(self, bodies: List[ConvexBody], check: Callable[[ConvexBody, RngSpec], Any], rng: RngSpec) -> List[Verdict]:
        def evaluate(item):
            index, body = item
            try:
                return check(body, rng.child(index)).verdict
            except PreconditionError:
                return Verdict.PRECONDITION_NOT_MET

        return self.checker.parallel_map(evaluate, list(enumerate(bodies)))

    def _lemma_suites(self, params: Dict[str, Any], scale: float, rng: RngSpec) -> Dict[str, Any]:
        budget = self._budget(scale)
        options = {"budget": budget}

        def bodies(kind: str, dim: int, count: int, stream: RngSpec) -> List[ConvexBody]:
            factory = random_origin_hpolytope if kind == "origin" else random_symmetric_hpolytope
            return [factory(stream.child(i).generator(), dim) for i in range(self._count(count, scale))]

        half = int(params.get("star_bodies", 100)) // 2
        suites = {
            "star_moment_n2": (bodies("origin", 2, half, rng.child(1)), lambda K, r: self.checker.check_star_moment(K, rng=r, **options)),
            "star_moment_n3": (bodies("origin", 3, half, rng.child(2)), lambda K, r: self.checker.check_star_moment(K, rng=r, **options)),
        }
        symmetric = bodies("sym", 2, int(params.get("symmetric_bodies", 50)), rng.child(3))
        gaussian, ratio = make_gaussian(2), make_diag_quadratic([1.0, 4.0])
        suites.update({
            "grad_laplace_gaussian": (symmetric, lambda K, r: self.checker.check_grad_laplace(gaussian, K, rng=r, **options)),
            "grad_laplace_diag": (symmetric, lambda K, r: self.checker.check_grad_laplace(ratio, K, rng=r, **options)),
            "cfm": (symmetric, lambda K, r: self.checker.check_cfm(K, rng=r, **options)),
            "dilate_local": (symmetric, lambda K, r: self.checker.check_dilate_local(K, rng=r, **options)),
            "est2": (symmetric, lambda K, r: self.checker.check_est2(K, rng=r, **options)),
        })
        verdicts: List[Verdict] = []
        details = {}
        for index, (name, (group, check)) in enumerate(suites.items()):
            group_verdicts = self._run_checks(group, check, rng.child(10 + index))
            details[name] = _tally(group_verdicts)
            verdicts += group_verdicts
        return {"status": _suite_status(verdicts), "verdict": Verdict.worst(verdicts), "details": details}

    def _dimension_one_profile(self, params: Dict[str, Any], scale: float, rng: RngSpec) -> Dict[str, Any]:
        tol = float(params.get("tol", 2e-3))
        report = self.checker.profile_p_star(
            make_gaussian(1), interval(1.0, 1.0), interval(3.0, 3.0), tol=tol, rng=rng,
        )
        return {
            "status": _status(report.p_star >= 1.0 - tol),
            "value": report.p_star,
            "details": report.to_dict(),
        }

    def _dilate_concavity(self, params: Dict[str, Any], scale: float, rng: RngSpec) -> Dict[str, Any]:
        t_grid = parse_grid(params.get("t_grid", "0.2:3:0.1"))
        P = make_gaussian(2)
        reports = {
            "box(1,2)": self.checker.dilate_concavity(P, ConvexBody.box([1.0, 2.0]), t_grid, rng=rng.child(1)),
            "ball(1)": self.checker.dilate_concavity(P, ConvexBody.ball(1.0), t_grid, rng=rng.child(2)),
        }
        verdicts = [r.verdict for r in reports.values()]
        return {
            "status": _suite_status(verdicts),
            "verdict": Verdict.worst(verdicts),
            "value": max((r.value.value for r in reports.values() if r.value), default=None),
            "details": {name: r.to_dict() for name, r in reports.items()},
        }

    def _search_guard(self, params: Dict[str, Any], scale: float, rng: RngSpec) -> Dict[str, Any]:
        config = OptimizerConfig(
            restarts=int(params.get("restarts", 16)),
            max_evaluations=self._count(int(params.get("max_evaluations", 3200)), scale),
        )
        result = self.searcher.search_min_gap(
            make_gaussian(2), harmonic_space(SearchClass.ORIGIN), float(params.get("p", 0.25)),
            config=config, budget=self._budget(scale), rng=rng,
        )
        return {
            "status": _status(not result.certified_violation),
            "value": result.best_objective,
            "details": result.to_dict(),
        }
