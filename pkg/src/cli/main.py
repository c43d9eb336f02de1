"""
gz - 次元付き Brunn–Minkowski 凹性ラボの CLI

サブコマンド: measure, gap, profile, lemmas, alpha, beta, bochner, variation, localc, search, acceptance
終了コード: 0 成功（すべて成立）, 1 違反を検出, 2 入力エラー, 3 不確定を含む
"""

import logging
import sys
import time
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

import click
import numpy as np
import typer
from rich.console import Console
from rich.table import Table

from src.cli.acceptance import AcceptanceRunner, CriterionStatus
from src.config import LabSettings, get_settings
from src.engines.bodies import boundary_curve_2d
from src.engines.inequalities import DEFAULT_P_CAP, DEFAULT_TOL, InequalityChecker
from src.engines.integrals import IntegrationEngine
from src.engines.localform import LocalFormEngine, alpha as alpha_fn, beta as beta_fn, bochner_residual_1d
from src.engines.search import CounterexampleSearch, default_space
from src.exceptions import InputError, LabError, LogConcavityViolationError, PreconditionError
from src.interfaces.report_writer import build_envelope, render_csv, render_json, write_text
from src.interfaces.spec_loader import parse_body, parse_grid, parse_measure, parse_perturbation
from src.logging_config import configure_logging
from src.models.body import DirectionGrid
from src.models.estimate import MethodChoice, RngSpec
from src.models.report import CheckReport, Verdict
from src.models.search import OptimizerConfig, SearchClass, SearchObjective

console = Console(stderr=True)
app = typer.Typer(help="gz - 次元付き Brunn–Minkowski 凹性ラボ", add_completion=False, no_args_is_help=True)

# ログ設定
logger = logging.getLogger(__name__)

# 終了コード
EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2
EXIT_INCONCLUSIVE = 3


class ReportFormat(str, Enum):
    """レポート形式"""
    JSON = "json"
    CSV = "csv"


class MomentChoice(str, Enum):
    """measure コマンドのモーメント"""
    NORM2 = "norm2"      # |x|²
    NORM4 = "norm4"      # |x|⁴
    EST2 = "est2"        # 1/(|x|²+2)


MOMENTS = {
    MomentChoice.NORM2: lambda x: np.sum(x**2, axis=1),
    MomentChoice.NORM4: lambda x: np.sum(x**2, axis=1) ** 2,
    MomentChoice.EST2: lambda x: 1.0 / (np.sum(x**2, axis=1) + 2.0),
}

# 共通オプション
MEASURE = typer.Option("gaussian", "--measure", help="gaussian | diag:c1,...,cn")
DIM = typer.Option(2, "--dim", min=1, max=3, help="次元 n")
METHOD = typer.Option(MethodChoice.AUTO, "--method", help="auto | mc | radial")
BUDGET = typer.Option(None, "--budget", min=100, help="MCサンプル数（既定は GZ_DEFAULT_BUDGET）")
SEED = typer.Option(0, "--seed", min=0, help="乱数シード")
FORMAT = typer.Option(ReportFormat.JSON, "--format", help="json | csv")
OUTPUT = typer.Option(None, "--output", help="出力ファイル（省略時は標準出力）")
GRID_SIZE = typer.Option(720, "--grid-size", min=8, help="境界の角度グリッド")


def _settings(ctx: typer.Context) -> LabSettings:
    return ctx.obj if isinstance(ctx.obj, LabSettings) else get_settings()


def _config(**values: Any) -> Dict[str, Any]:
    """解決済み設定（Enum は値に変換）"""
    return {k: (v.value if isinstance(v, Enum) else v) for k, v in values.items()}


def _emit(
    ctx: typer.Context,
    command: str,
    config: Dict[str, Any],
    seed: Optional[int],
    result: Dict[str, Any],
    rows: List[Dict[str, Any]],
    fmt: ReportFormat,
    output: Optional[str],
    started: float,
) -> None:
    settings = _settings(ctx)
    if fmt == ReportFormat.CSV:
        text = render_csv(command, rows)
    else:
        wall = None if settings.reproducible_reports else time.perf_counter() - started
        text = render_json(build_envelope(command, config, seed, result, wall))
    if output:
        write_text(text, output)
        console.print(f"✅ レポートを書き出しました: {output}", style="green")
    else:
        sys.stdout.write(text)


def exit_code_for(verdicts: Sequence[Verdict]) -> int:
    """判定の集約から終了コード"""
    worst = Verdict.worst(list(verdicts))
    if worst == Verdict.VIOLATED:
        return EXIT_VIOLATION
    if worst == Verdict.INCONCLUSIVE:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


@app.callback()
def configure(
    ctx: typer.Context,
    workers: Optional[int] = typer.Option(None, "--workers", min=1, help="ワーカースレッド数"),
    log_level: Optional[str] = typer.Option(None, "--log-level", help="DEBUG | INFO | WARNING | ERROR"),
    log_format: Optional[str] = typer.Option(None, "--log-format", help="console | json"),
) -> None:
    """設定の解決とログ初期化"""
    update: Dict[str, Any] = {}
    if workers is not None:
        update["workers"] = workers
    if log_level is not None:
        update["log_level"] = log_level.upper()
    if log_format is not None:
        if log_format not in ("console", "json"):
            raise InputError(f"ログ形式は console か json です: {log_format}")
        update["log_format"] = log_format
    settings = get_settings().model_copy(update=update)
    configure_logging(settings.log_level, settings.log_format)
    ctx.obj = settings


@app.command()
def measure(
    ctx: typer.Context,
    measure: str = MEASURE,
    dim: int = DIM,
    K: str = typer.Option(..., "--K", help="凸体（省略記法または JSON）"),
    moment: Optional[MomentChoice] = typer.Option(None, "--moment", help="追加のモーメント"),
    method: MethodChoice = METHOD,
    budget: Optional[int] = BUDGET,
    seed: int = SEED,
    fmt: ReportFormat = FORMAT,
    output: Optional[str] = OUTPUT,
) -> int:
    """μ(K)（と任意のモーメント）を推定"""
    started = time.perf_counter()
    settings = _settings(ctx)
    P = parse_measure(measure, dim)
    body = parse_body(K, dim)
    integrator = IntegrationEngine(settings)
    rng = RngSpec(seed=seed)
    mu = integrator.mu_of_body(P, body, method=method, budget=budget, rng=rng.child(0))
    result: Dict[str, Any] = {"body": body.to_dict(), "measure": P.to_dict(), "mu": mu.to_dict()}
    row: Dict[str, Any] = mu.to_dict()
    if moment is not None:
        value = integrator.moment(P, body, MOMENTS[moment], method=method, budget=budget, rng=rng.child(1))
        result["moment"] = {"name": moment.value, **value.to_dict()}
        row.update(moment_value=value.value, moment_stderr=value.stderr)
    config = _config(measure=measure, dim=dim, K=K, moment=moment, method=method,
                     budget=budget or settings.default_budget)
    _emit(ctx, "measure", config, seed, result, [row], fmt, output, started)
    return EXIT_OK


@app.command()
def gap(
    ctx: typer.Context,
    measure: str = MEASURE,
    dim: int = DIM,
    K: str = typer.Option(..., "--K", help="凸体 K"),
    L: str = typer.Option(..., "--L", help="凸体 L"),
    lam: float = typer.Option(0.5, "--lambda", help="λ ∈ [0, 1]"),
    p: float = typer.Option(..., "--p", help="指数 p（0 は対数形式）"),
    crn: bool = typer.Option(False, "--crn", help="共通乱数モード（保守的標準誤差）"),
    method: MethodChoice = METHOD,
    budget: Optional[int] = BUDGET,
    seed: int = SEED,
    fmt: ReportFormat = FORMAT,
    output: Optional[str] = OUTPUT,
) -> int:
    """p凹性ギャップ μ(λK+(1−λ)L)^p − λμ(K)^p − (1−λ)μ(L)^p"""
    started = time.perf_counter()
    settings = _settings(ctx)
    P = parse_measure(measure, dim)
    report = InequalityChecker(settings).gap(
        P, parse_body(K, dim), parse_body(L, dim), lam, p,
        method=method, budget=budget, rng=RngSpec(seed=seed), crn=crn,
    )
    row = {
        "lambda": lam, "p": p, "gap": report.gap.value, "stderr": report.gap.stderr,
        "verdict": report.verdict, "mu_K": report.mu_K.value, "mu_L": report.mu_L.value, "mu_M": report.mu_M.value,
    }
    config = _config(measure=measure, dim=dim, K=K, L=L, lam=lam, p=p, crn=crn, method=method,
                     budget=budget or settings.default_budget)
    _emit(ctx, "gap", config, seed, report.to_dict(), [row], fmt, output, started)
    return exit_code_for([report.verdict])


@app.command()
def profile(
    ctx: typer.Context,
    measure: str = MEASURE,
    dim: int = DIM,
    K: str = typer.Option(..., "--K", help="凸体 K"),
    L: str = typer.Option(..., "--L", help="凸体 L"),
    lambda_grid: str = typer.Option("0.1:0.9:0.1", "--lambda-grid", help="λグリッド（a,b,c または start:stop:step）"),
    p_cap: float = typer.Option(DEFAULT_P_CAP, "--p-cap", help="二分探索の上限"),
    tol: float = typer.Option(DEFAULT_TOL, "--tol", help="二分探索の許容幅"),
    p_lo: float = typer.Option(0.0, "--p-lo", help="二分探索の下限"),
    method: MethodChoice = METHOD,
    budget: Optional[int] = BUDGET,
    seed: int = SEED,
    fmt: ReportFormat = FORMAT,
    output: Optional[str] = OUTPUT,
) -> int:
    """最大指数 p* を二分探索"""
    started = time.perf_counter()
    settings = _settings(ctx)
    P = parse_measure(measure, dim)
    grid = parse_grid(lambda_grid)
    report = InequalityChecker(settings).profile_p_star(
        P, parse_body(K, dim), parse_body(L, dim), grid, p_cap=p_cap, tol=tol,
        method=method, budget=budget, rng=RngSpec(seed=seed), p_lo=p_lo,
    )
    rows = [
        {"lambda": g.lam, "p_star": report.p_star, "gap": g.gap.value, "stderr": g.gap.stderr,
         "verdict": g.verdict, "flagged": report.flagged}
        for g in report.gaps
    ]
    config = _config(measure=measure, dim=dim, K=K, L=L, lambda_grid=grid, p_cap=p_cap, tol=tol, p_lo=p_lo,
                     method=method, budget=budget or settings.default_budget)
    _emit(ctx, "profile", config, seed, report.to_dict(), rows, fmt, output, started)
    return EXIT_INCONCLUSIVE if report.flagged else EXIT_OK


@app.command()
def lemmas(
    ctx: typer.Context,
    body: str = typer.Option(..., "--body", help="凸体（省略記法または JSON）"),
    measure: str = MEASURE,
    dim: int = DIM,
    eps: float = typer.Option(0.0, "--eps", help="Jensen 下界の ε"),
    method: MethodChoice = METHOD,
    budget: Optional[int] = BUDGET,
    seed: int = SEED,
    fmt: ReportFormat = FORMAT,
    output: Optional[str] = OUTPUT,
) -> int:
    """前提を満たす補題レベルの不等式をすべて判定"""
    started = time.perf_counter()
    settings = _settings(ctx)
    K = parse_body(body, dim)
    P = parse_measure(measure, dim)
    checker = InequalityChecker(settings)
    rng = RngSpec(seed=seed)
    options = {"method": method, "budget": budget}

    checks = [
        ("star_moment", lambda r: checker.check_star_moment(K, rng=r, **options)),
        ("grad_laplace", lambda r: checker.check_grad_laplace(P, K, rng=r, **options)),
        ("cfm", lambda r: checker.check_cfm(K, rng=r, **options)),
        ("dilate_local", lambda r: checker.check_dilate_local(K, rng=r, **options)),
        ("est2", lambda r: checker.check_est2(K, rng=r, **options)),
        ("jensen", lambda r: _jensen_as_check(checker.jensen_lower_bound(P, K, eps, rng=r, **options))),
    ]
    reports: List[CheckReport] = []
    for index, (name, run_check) in enumerate(checks):
        if name == "est2" and dim != 2:
            reports.append(CheckReport(name=name, verdict=Verdict.PRECONDITION_NOT_MET, message="n=2 のみ"))
            continue
        try:
            reports.append(run_check(rng.child(index)))
        except PreconditionError as e:
            reports.append(CheckReport(name=name, verdict=Verdict.PRECONDITION_NOT_MET, message=str(e)))

    _display_checks(reports)
    rows = [
        {"check": r.name, "value": r.value.value if r.value else None, "stderr": r.value.stderr if r.value else None,
         "verdict": r.verdict, "direction": r.details.get("direction"), "message": r.message}
        for r in reports
    ]
    config = _config(body=body, measure=measure, dim=dim, eps=eps, method=method,
                     budget=budget or settings.default_budget)
    _emit(ctx, "lemmas", config, seed, {"checks": [r.to_dict() for r in reports]}, rows, fmt, output, started)
    return exit_code_for([r.verdict for r in reports])


def _jensen_as_check(report: Any) -> CheckReport:
    return CheckReport(
        name="jensen", value=report.lhs, verdict=report.verdict,
        details={"direction": ">=bound", **report.to_dict()},
    )


def _display_checks(reports: List[CheckReport]) -> None:
    """判定結果表"""
    table = Table(title="Lemma Checks")
    table.add_column("Check", style="cyan")
    table.add_column("Value")
    table.add_column("Stderr")
    table.add_column("Verdict")
    styles = {
        Verdict.HOLDS: "green", Verdict.VIOLATED: "red",
        Verdict.INCONCLUSIVE: "yellow", Verdict.PRECONDITION_NOT_MET: "dim",
    }
    for r in reports:
        value = f"{r.value.value:.6g}" if r.value else "-"
        stderr = f"{r.value.stderr:.1e}" if r.value else "-"
        table.add_row(r.name, value, stderr, f"[{styles[r.verdict]}]{r.verdict.value}[/]")
    console.print(table)


def _r_values(R: Optional[float], grid: Optional[str]) -> List[float]:
    if grid:
        return parse_grid(grid)
    if R is None:
        raise InputError("--R か --grid のいずれかが必要です")
    return [R]


@app.command()
def alpha(
    ctx: typer.Context,
    R: Optional[float] = typer.Option(None, "--R", help="R ≥ 0"),
    grid: Optional[str] = typer.Option(None, "--grid", help="R グリッド"),
    fmt: ReportFormat = FORMAT,
    output: Optional[str] = OUTPUT,
) -> int:
    """α(R) = ∫₀ᴿ (t⁴−3t²)e^{−t²/2}dt"""
    started = time.perf_counter()
    values = _r_values(R, grid)
    results = LocalFormEngine(_settings(ctx)).scan(alpha_fn, values)
    rows = [{"R": r, "alpha": a} for r, a in zip(values, results)]
    _emit(ctx, "alpha", _config(R=values), None, {"values": rows}, rows, fmt, output, started)
    return EXIT_OK


@app.command()
def beta(
    ctx: typer.Context,
    R: Optional[float] = typer.Option(None, "--R", help="R > 0"),
    grid: Optional[str] = typer.Option(None, "--grid", help="R グリッド"),
    fmt: ReportFormat = FORMAT,
    output: Optional[str] = OUTPUT,
) -> int:
    """β(R)（閉形式ノイマン解による）"""
    started = time.perf_counter()
    values = _r_values(R, grid)
    results = LocalFormEngine(_settings(ctx)).scan(beta_fn, values)
    rows = [{"R": r, "beta": b} for r, b in zip(values, results)]
    _emit(ctx, "beta", _config(R=values), None, {"values": rows}, rows, fmt, output, started)
    return EXIT_OK


@app.command()
def bochner(
    ctx: typer.Context,
    R: Optional[float] = typer.Option(None, "--R", help="R > 0"),
    grid: Optional[str] = typer.Option(None, "--grid", help="R グリッド"),
    fmt: ReportFormat = FORMAT,
    output: Optional[str] = OUTPUT,
) -> int:
    """1次元 Bochner 恒等式の残差"""
    started = time.perf_counter()
    values = _r_values(R, grid)
    reports = LocalFormEngine(_settings(ctx)).scan(bochner_residual_1d, values)
    rows = [r.to_dict() for r in reports]
    _emit(ctx, "bochner", _config(R=values), None, {"values": rows}, rows, fmt, output, started)
    return EXIT_OK if all(r.residual <= 1e-8 for r in reports) else EXIT_INCONCLUSIVE


@app.command()
def variation(
    ctx: typer.Context,
    body: str = typer.Option(..., "--body", help="n=2 の凸体"),
    psi: str = typer.Option("one", "--psi", help="one | const:v | cos:k | sin:k | JSON"),
    order: int = typer.Option(1, "--order", min=1, max=2, help="変分の次数"),
    measure: str = MEASURE,
    grid_size: int = GRID_SIZE,
    step: Optional[float] = typer.Option(None, "--step", help="有限差分ステップ"),
    fmt: ReportFormat = FORMAT,
    output: Optional[str] = OUTPUT,
) -> int:
    """変分公式と有限差分の比較"""
    started = time.perf_counter()
    engine = LocalFormEngine(_settings(ctx))
    P = parse_measure(measure, 2)
    curve = boundary_curve_2d(parse_body(body, 2), size=grid_size)
    perturbation = parse_perturbation(psi, DirectionGrid.circle(grid_size))
    if order == 1:
        report = engine.first_variation_2d(P, curve, perturbation, step=step)
    else:
        report = engine.second_variation_2d(P, curve, perturbation, step=step)
    config = _config(body=body, psi=psi, order=order, measure=measure, grid_size=grid_size, step=report.step)
    _emit(ctx, "variation", config, None, report.to_dict(), [report.to_dict()], fmt, output, started)
    return EXIT_OK if report.relative_error <= 1e-3 else EXIT_INCONCLUSIVE


@app.command()
def localc(
    ctx: typer.Context,
    body: str = typer.Option(..., "--body", help="n=2 の凸体"),
    psi: str = typer.Option("one", "--psi", help="one | const:v | cos:k | sin:k | JSON"),
    measure: str = MEASURE,
    grid_size: int = GRID_SIZE,
    C: Optional[float] = typer.Option(None, "--C", help="局所不等式を判定する定数"),
    fmt: ReportFormat = FORMAT,
    output: Optional[str] = OUTPUT,
) -> int:
    """局所定数 c = n(1 − μ″μ/(μ′)²)"""
    started = time.perf_counter()
    engine = LocalFormEngine(_settings(ctx))
    P = parse_measure(measure, 2)
    curve = boundary_curve_2d(parse_body(body, 2), size=grid_size)
    perturbation = parse_perturbation(psi, DirectionGrid.circle(grid_size))
    report = engine.local_c_estimate(P, curve, perturbation)
    result: Dict[str, Any] = report.to_dict()
    code = EXIT_OK
    if C is not None:
        residual = engine.local_form_residual(P, curve, perturbation, C)
        result["residual"] = residual.to_dict()
        code = exit_code_for([residual.verdict])
    config = _config(body=body, psi=psi, measure=measure, grid_size=grid_size, C=C)
    _emit(ctx, "localc", config, None, result, [report.to_dict()], fmt, output, started)
    return code


@app.command()
def search(
    ctx: typer.Context,
    body_class: SearchClass = typer.Option(SearchClass.ORIGIN, "--class", help="sym | origin"),
    objective: SearchObjective = typer.Option(SearchObjective.MIN_GAP, "--objective", help="min_gap | p_star"),
    p: Optional[float] = typer.Option(None, "--p", help="固定指数（既定は 1/(2n)）"),
    measure: str = MEASURE,
    dim: int = DIM,
    lambda_grid: str = typer.Option("0.1:0.9:0.1", "--lambda-grid", help="λグリッド"),
    restarts: int = typer.Option(16, "--restarts", min=1, help="リスタート数"),
    max_evaluations: int = typer.Option(3200, "--max-evals", min=1, help="全体の評価回数"),
    method: MethodChoice = METHOD,
    budget: Optional[int] = BUDGET,
    seed: int = SEED,
    fmt: ReportFormat = FORMAT,
    output: Optional[str] = OUTPUT,
) -> int:
    """低い p凹性を与える凸体ペアを探索"""
    started = time.perf_counter()
    settings = _settings(ctx)
    P = parse_measure(measure, dim)
    space = default_space(body_class, dim)
    grid = parse_grid(lambda_grid)
    config = OptimizerConfig(restarts=restarts, max_evaluations=max_evaluations)
    engine = CounterexampleSearch(settings)
    rng = RngSpec(seed=seed)
    if objective == SearchObjective.MIN_GAP:
        p = p if p is not None else 1.0 / (2 * dim)
        result = engine.search_min_gap(P, space, p, grid, config, method=method, budget=budget, rng=rng)
    else:
        result = engine.search_profile(P, space, grid, config, method=method, budget=budget, rng=rng)
    rows = [t.to_dict() for t in result.trajectory]
    run_config = _config(
        body_class=body_class, objective=objective, p=p, measure=measure, dim=dim, lambda_grid=grid,
        restarts=restarts, max_evaluations=max_evaluations, method=method, budget=budget or settings.default_budget,
    )
    _emit(ctx, "search", run_config, seed, result.to_dict(include_trajectory=True), rows, fmt, output, started)
    return EXIT_VIOLATION if result.certified_violation else EXIT_OK


@app.command()
def acceptance(
    ctx: typer.Context,
    suite: str = typer.Option("primary", "--suite", help="スイート名または YAML パス"),
    only: Optional[str] = typer.Option(None, "--only", help="実行する基準番号（カンマ区切り）"),
    scale: float = typer.Option(1.0, "--scale", min=0.001, help="試行数・予算の倍率"),
    seed: int = SEED,
    fmt: ReportFormat = FORMAT,
    output: Optional[str] = OUTPUT,
) -> int:
    """受け入れ基準スイートを実行"""
    started = time.perf_counter()
    selected = [int(v) for v in only.split(",")] if only else None
    runner = AcceptanceRunner(_settings(ctx), seed=seed)
    results = runner.run(suite, only=selected, scale=scale)
    runner.display(results, console)
    rows = [r.to_row() for r in results]
    config = _config(suite=suite, only=selected, scale=scale)
    _emit(ctx, "acceptance", config, seed, {"criteria": [r.to_dict() for r in results]}, rows, fmt, output, started)
    statuses = {r.status for r in results}
    if CriterionStatus.FAILED in statuses:
        return EXIT_VIOLATION
    if CriterionStatus.INCONCLUSIVE in statuses:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def run(argv: Optional[Sequence[str]] = None) -> int:
    """argv を実行して終了コードを返す"""
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        code = app(args=args, prog_name="gz", standalone_mode=False)
    except click.exceptions.ClickException as e:
        e.show()
        return EXIT_INPUT
    except click.exceptions.Abort:
        return EXIT_INPUT
    except LogConcavityViolationError as e:
        logger.error(f"対数凹性との矛盾: {e}")
        console.print(f"❌ {e}", style="red")
        return EXIT_VIOLATION
    except LabError as e:
        console.print(f"❌ エラー: {e}", style="red")
        return EXIT_INPUT
    except Exception as e:
        logger.exception(f"予期しないエラー: {type(e).__name__}: {e}")
        console.print(f"❌ 予期しないエラー: {e}", style="red")
        return EXIT_INCONCLUSIVE
    return code if isinstance(code, int) else EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
