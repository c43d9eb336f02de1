"""
対数凹測度

μ = e^{−V}dx のポテンシャル生成と、宣言された曲率定数・オラクルの整合性チェック。
"""

import logging
import math
from typing import Optional, Sequence

import numpy as np

from src.exceptions import InputError
from src.models.potential import BoundsReport, Oracle, OracleReport, Potential, PotentialKind

# ログ設定
logger = logging.getLogger(__name__)

BOUND_TOL = 1e-8
ORACLE_REL_TOL = 1e-6
EVEN_TOL = 1e-10


def make_gaussian(n: int) -> Potential:
    """標準ガウス V(x) = |x|²/2（正規化定数 (2π)^{n/2}）"""
    if n < 1:
        raise InputError(f"次元は1以上である必要があります: {n}")
    return Potential(
        kind=PotentialKind.GAUSSIAN,
        dim=n,
        eval=lambda x: 0.5 * np.sum(x**2, axis=1),
        grad=lambda x: np.array(x, dtype=float),
        hess=lambda x: np.broadcast_to(np.eye(n), (x.shape[0], n, n)).copy(),
        k1=1.0,
        k2=1.0,
        is_even=True,
        log_normalizer=0.5 * n * math.log(2.0 * math.pi),
    )


def make_diag_quadratic(c: Sequence[float]) -> Potential:
    """V(x) = Σcᵢxᵢ²/2、k₁ = min c、k₂ = mean c"""
    coeffs = np.asarray(c, dtype=float).reshape(-1)
    if coeffs.size == 0 or np.any(coeffs <= 0) or not np.all(np.isfinite(coeffs)):
        raise InputError(f"係数はすべて正である必要があります: {list(coeffs)}")
    n = coeffs.size
    diag = np.diag(coeffs)
    return Potential(
        kind=PotentialKind.DIAG_QUADRATIC,
        dim=n,
        eval=lambda x: 0.5 * (x**2) @ coeffs,
        grad=lambda x: x * coeffs,
        hess=lambda x: np.broadcast_to(diag, (x.shape[0], n, n)).copy(),
        k1=float(np.min(coeffs)),
        k2=float(np.mean(coeffs)),
        is_even=True,
        coefficients=coeffs.tolist(),
        log_normalizer=float(np.sum(0.5 * np.log(2.0 * math.pi / coeffs))),
    )


def make_custom(
    n: int,
    eval: Oracle,
    grad: Oracle,
    hess: Oracle,
    k1: float,
    k2: float,
    is_even: bool = False,
    log_normalizer: Optional[float] = None,
) -> Potential:
    """任意のオラクルから Potential を構成（3つのオラクルすべてが必要）"""
    if eval is None or grad is None or hess is None:
        raise InputError("eval・grad・hess のすべてが必要です")
    return Potential(
        kind=PotentialKind.CUSTOM,
        dim=n,
        eval=eval,
        grad=grad,
        hess=hess,
        k1=k1,
        k2=k2,
        is_even=is_even,
        log_normalizer=log_normalizer,
    )


def sample_points(n: int, count: int = 100, seed: int = 0, scale: float = 2.0) -> np.ndarray:
    """スポットチェック用の標本点"""
    gen = np.random.Generator(np.random.Philox(key=seed))
    return scale * gen.standard_normal((count, n))


def check_bounds(P: Potential, points: np.ndarray) -> BoundsReport:
    """∇²V ≥ k₁Id と ΔV ≤ k₂n のスポットチェック"""
    X = np.atleast_2d(np.asarray(points, dtype=float))
    H = P.hess(X)
    eig_min = np.linalg.eigvalsh(H)[:, 0]
    trace_n = np.trace(H, axis1=1, axis2=2) / P.dim

    low_ok = eig_min >= P.k1 - BOUND_TOL
    high_ok = trace_n <= P.k2 + BOUND_TOL
    passed = bool(np.all(low_ok) and np.all(high_ok))

    worst_point = None
    violated = None
    if not passed:
        # 違反量が最大の点
        low_excess = np.maximum(P.k1 - eig_min, 0.0)
        high_excess = np.maximum(trace_n - P.k2, 0.0)
        if np.max(low_excess) >= np.max(high_excess):
            idx, violated = int(np.argmax(low_excess)), "k1"
        else:
            idx, violated = int(np.argmax(high_excess)), "k2"
        worst_point = X[idx].tolist()
        logger.warning(f"曲率定数の宣言違反 ({violated}) 点 {worst_point}")

    return BoundsReport(
        min_eigenvalue=float(np.min(eig_min)),
        max_trace_over_n=float(np.max(trace_n)),
        k1=P.k1,
        k2=P.k2,
        passed=passed,
        worst_point=worst_point,
        violated_bound=violated,
        points_checked=int(X.shape[0]),
    )


def check_oracles(P: Potential, points: np.ndarray, step: float = 1e-5) -> OracleReport:
    """
    オラクルの整合性（中心差分）と偶関数性のチェック

    Returns:
        OracleReport（grad/hess は相対誤差の最大）
    """
    X = np.atleast_2d(np.asarray(points, dtype=float))
    m, n = X.shape
    g = P.grad(X)
    H = P.hess(X)

    fd_grad = np.empty((m, n))
    fd_hess = np.empty((m, n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = step
        fd_grad[:, i] = (P.eval(X + e) - P.eval(X - e)) / (2.0 * step)
        fd_hess[:, :, i] = (P.grad(X + e) - P.grad(X - e)) / (2.0 * step)

    def rel(a: np.ndarray, b: np.ndarray) -> float:
        scale = np.maximum(1.0, np.abs(b))
        return float(np.max(np.abs(a - b) / scale))

    grad_error = rel(fd_grad, g)
    hess_error = rel(fd_hess, H)
    even_error = 0.0
    if P.is_even:
        even_error = max(
            float(np.max(np.abs(P.eval(X) - P.eval(-X)))),
            float(np.max(np.abs(P.grad(-X) + g))),
        )
    passed = grad_error <= ORACLE_REL_TOL and hess_error <= ORACLE_REL_TOL and even_error <= EVEN_TOL
    if not passed:
        logger.warning(f"オラクル不整合: grad={grad_error:.2e}, hess={hess_error:.2e}, even={even_error:.2e}")
    return OracleReport(
        grad_error=grad_error, hess_error=hess_error, even_error=even_error, passed=passed, points_checked=m,
    )
