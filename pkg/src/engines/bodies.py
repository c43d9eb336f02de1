"""
凸体の幾何クエリ

支持関数・所属判定・動径関数・拡大・ミンコフスキー凸結合・2次元境界曲線、
および凸体ファクトリと乱数凸体生成器を提供します。
"""

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection

from src.exceptions import (
    DegenerateInputError,
    DimensionMismatchError,
    FamilyInvalidError,
    InputError,
    NotC2PlusError,
    PreconditionError,
)
from src.models.body import BodyFamily, BodyKind, ConvexBody, DirectionGrid
from src.models.curve import BoundaryCurve2D, CurveKind

# ログ設定
logger = logging.getLogger(__name__)

UNIT_INPUT_TOL = 1e-10
CONTAINS_TOL = 1e-12
DEFAULT_RHO_MIN = 1e-6
DEFAULT_SMOOTHING = 1e-2


# 支持関数

def _check_unit(u: np.ndarray, dim: int) -> np.ndarray:
    arr = np.atleast_2d(np.asarray(u, dtype=float))
    if arr.shape[1] != dim:
        raise DimensionMismatchError(f"方向の次元 {arr.shape[1]} が凸体の次元 {dim} と一致しません")
    norms = np.linalg.norm(arr, axis=1)
    if np.any(np.abs(norms - 1.0) > UNIT_INPUT_TOL):
        raise InputError(f"単位ベクトルではありません: |u|={norms[np.argmax(np.abs(norms - 1.0))]:.12f}")
    return arr


def support(K: ConvexBody, u: Sequence[float]) -> float:
    """h_K(u) = sup_{x∈K}⟨x, u⟩"""
    return float(support_values(K, u)[0])


def support_values(K: ConvexBody, directions: np.ndarray) -> np.ndarray:
    """複数方向の支持関数値"""
    U = _check_unit(directions, K.dim)
    kind = K.kind
    if kind == BodyKind.BALL:
        return np.full(U.shape[0], K.radius)
    if kind == BodyKind.BOX:
        return np.abs(U) @ K.half_widths
    if kind == BodyKind.ELLIPSOID:
        return np.sqrt((U**2) @ (K.semi_axes**2))
    if kind == BodyKind.HPOLYTOPE:
        vertices = hpolytope_vertices(K)
        if vertices is not None:
            return np.max(U @ vertices.T, axis=1)
        return np.array([_support_lp(K, u) for u in U])
    return _grid_support(K, U)


def _grid_support(K: ConvexBody, U: np.ndarray) -> np.ndarray:
    if K.dim == 1:
        plus, minus = _interval_values(K)
        return np.where(U[:, 0] > 0, plus, minus)
    if K.dim == 2:
        spline = K.cached("spline", lambda: _periodic_spline(K.grid.angles, K.values))
        theta = np.mod(np.arctan2(U[:, 1], U[:, 0]), 2.0 * np.pi)
        return spline(theta)
    # n≥3: 最近傍方向の値
    nearest = np.argmax(U @ K.grid.directions.T, axis=1)
    return K.values[nearest]


def _periodic_spline(angles: np.ndarray, values: np.ndarray):
    from scipy.interpolate import CubicSpline

    theta = np.append(angles, 2.0 * np.pi)
    return CubicSpline(theta, np.append(values, values[0]), bc_type="periodic")


def _interval_values(K: ConvexBody) -> Tuple[float, float]:
    """n=1 の支持値 (h(+1), h(−1))"""
    dirs = K.grid.directions[:, 0]
    plus = float(K.values[np.argmax(dirs)])
    minus = float(K.values[np.argmin(dirs)])
    return plus, minus


def _support_lp(K: ConvexBody, u: np.ndarray) -> float:
    result = linprog(-u, A_ub=K.normals, b_ub=K.offsets, bounds=[(None, None)] * K.dim, method="highs")
    if result.status == 3:
        return math.inf
    if not result.success:
        raise DegenerateInputError(f"多面体が空です: {result.message}")
    return float(-result.fun)


def sample_support(K: ConvexBody, grid: DirectionGrid) -> np.ndarray:
    """グリッド上の支持値（同一グリッドの SupportGrid はそのまま）"""
    if K.kind == BodyKind.SUPPORT_GRID and K.grid.same_as(grid):
        return np.array(K.values)
    return support_values(K, grid.directions)


# H多面体の頂点

def chebyshev_center(normals: np.ndarray, offsets: np.ndarray) -> Tuple[np.ndarray, float]:
    """最大内接球の中心と半径"""
    dim = normals.shape[1]
    c = np.zeros(dim + 1)
    c[-1] = -1.0
    A = np.hstack([normals, np.linalg.norm(normals, axis=1, keepdims=True)])
    result = linprog(c, A_ub=A, b_ub=offsets, bounds=[(None, None)] * dim + [(0, None)], method="highs")
    if not result.success:
        raise DegenerateInputError(f"チェビシェフ中心を求められません: {result.message}")
    return result.x[:dim], float(result.x[-1])


def hpolytope_vertices(K: ConvexBody) -> Optional[np.ndarray]:
    """H多面体の頂点（n ≤ 3、それ以外は None）"""
    if K.kind != BodyKind.HPOLYTOPE:
        raise InputError("H多面体ではありません")
    if K.dim > 3:
        return None
    return K.cached("vertices", lambda: _compute_vertices(K.normals, K.offsets))


def _compute_vertices(normals: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    dim = normals.shape[1]
    if dim == 1:
        upper = offsets[normals[:, 0] > 0]
        lower = offsets[normals[:, 0] < 0]
        if upper.size == 0 or lower.size == 0:
            raise DegenerateInputError("区間が有界ではありません")
        hi, lo = float(np.min(upper)), -float(np.min(lower))
        if hi < lo:
            raise DegenerateInputError("区間が空です")
        return np.array([[lo], [hi]])

    for axis in range(dim):
        for sign in (1.0, -1.0):
            e = np.zeros(dim)
            e[axis] = sign
            result = linprog(-e, A_ub=normals, b_ub=offsets, bounds=[(None, None)] * dim, method="highs")
            if result.status == 3:
                raise DegenerateInputError("多面体が有界ではありません")

    if np.all(offsets > 0):
        interior = np.zeros(dim)
    else:
        interior, radius = chebyshev_center(normals, offsets)
        if radius <= 1e-12:
            raise DegenerateInputError("多面体の内部が空です")
    halfspaces = np.hstack([normals, -offsets[:, None]])
    hs = HalfspaceIntersection(halfspaces, interior)
    vertices = np.unique(np.round(hs.intersections, 12), axis=0)
    return vertices


def polygon_vertices(K: ConvexBody) -> np.ndarray:
    """n=2 の多角形表現の頂点（反時計回り）"""
    if K.dim != 2:
        raise InputError("多角形頂点は n=2 のみです")
    if K.kind == BodyKind.BOX:
        a, b = K.half_widths
        return np.array([[a, b], [-a, b], [-a, -b], [a, -b]])
    if K.kind == BodyKind.HPOLYTOPE:
        return K.cached("polygon", lambda: _sort_ccw(hpolytope_vertices(K)))
    if K.kind == BodyKind.SUPPORT_GRID:
        return K.cached("polygon", lambda: _grid_polygon(K))
    raise InputError(f"{K.kind.value} は多角形ではありません")


def _sort_ccw(vertices: np.ndarray) -> np.ndarray:
    center = vertices.mean(axis=0)
    order = np.argsort(np.arctan2(vertices[:, 1] - center[1], vertices[:, 0] - center[0]))
    return vertices[order]


def edge_lengths(values: np.ndarray, delta: float) -> np.ndarray:
    """グリッド多角形の辺長 ℓⱼ = (hⱼ₊₁ + hⱼ₋₁ − 2cosΔ hⱼ)/sinΔ"""
    return (np.roll(values, -1) + np.roll(values, 1) - 2.0 * math.cos(delta) * values) / math.sin(delta)


def grid_vertices(angles: np.ndarray, values: np.ndarray, delta: float) -> np.ndarray:
    """隣接する支持直線 j, j+1 の交点 v_{j+1/2}"""
    theta_next = np.roll(angles, -1)
    h_next = np.roll(values, -1)
    x = (values * np.sin(theta_next) - h_next * np.sin(angles)) / math.sin(delta)
    y = (h_next * np.cos(angles) - values * np.cos(theta_next)) / math.sin(delta)
    return np.column_stack([x, y])


def _grid_polygon(K: ConvexBody) -> np.ndarray:
    delta = K.grid.delta
    lengths = edge_lengths(K.values, delta)
    scale = max(1.0, float(np.max(np.abs(K.values))))
    if np.all(lengths >= -1e-12 * scale):
        return grid_vertices(K.grid.angles, K.values, delta)
    logger.debug("隣接交点法が使えないため半平面交差で多角形を構成します")
    vertices = _compute_vertices(K.grid.directions, np.asarray(K.values))
    return _sort_ccw(vertices)


# 所属判定・動径関数

def contains(K: ConvexBody, x: Sequence[float]) -> bool:
    """x ∈ K（閉集合、SupportGrid はグリッド緩和）"""
    return bool(contains_points(K, np.atleast_2d(np.asarray(x, dtype=float)))[0])


def contains_points(K: ConvexBody, X: np.ndarray) -> np.ndarray:
    """複数点の所属判定"""
    X = np.atleast_2d(X)
    if X.shape[1] != K.dim:
        raise DimensionMismatchError("点の次元が一致しません")
    kind = K.kind
    if kind == BodyKind.BALL:
        return np.sum(X**2, axis=1) <= K.radius**2 * (1.0 + CONTAINS_TOL)
    if kind == BodyKind.BOX:
        return np.all(np.abs(X) <= K.half_widths + CONTAINS_TOL, axis=1)
    if kind == BodyKind.ELLIPSOID:
        return np.sum((X / K.semi_axes) ** 2, axis=1) <= 1.0 + CONTAINS_TOL
    if kind == BodyKind.HPOLYTOPE:
        return np.all(X @ K.normals.T <= K.offsets + CONTAINS_TOL, axis=1)
    return np.all(X @ K.grid.directions.T <= K.values + CONTAINS_TOL, axis=1)


def radial(K: ConvexBody, u: Sequence[float]) -> float:
    """r(u) = sup{t ≥ 0 : tu ∈ K}"""
    return float(radial_values(K, u)[0])


def radial_values(K: ConvexBody, directions: np.ndarray) -> np.ndarray:
    """複数方向の動径関数値"""
    if not K.contains_origin:
        raise PreconditionError(f"{K.describe()} は原点を含みません")
    U = _check_unit(directions, K.dim)
    kind = K.kind
    if kind == BodyKind.BALL:
        return np.full(U.shape[0], K.radius)
    if kind == BodyKind.ELLIPSOID:
        return 1.0 / np.sqrt((U**2) @ (1.0 / K.semi_axes**2))
    if kind == BodyKind.BOX:
        normals = np.vstack([np.eye(K.dim), -np.eye(K.dim)])
        offsets = np.concatenate([K.half_widths, K.half_widths])
    elif kind == BodyKind.HPOLYTOPE:
        normals, offsets = K.normals, K.offsets
    else:
        normals, offsets = K.grid.directions, K.values
    dots = U @ normals.T
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(dots > 0, offsets[None, :] / np.where(dots > 0, dots, 1.0), np.inf)
    return np.min(ratios, axis=1)


# 拡大・凸結合

def dilate(K: ConvexBody, t: float) -> ConvexBody:
    """tK（フラグは保存）"""
    if not t > 0:
        raise InputError(f"拡大率は正である必要があります: {t}")
    if t == 1.0:
        return K
    flags = {"is_symmetric": K.is_symmetric, "contains_origin": K.contains_origin}
    kind = K.kind
    if kind == BodyKind.BALL:
        return ConvexBody.build(kind=kind, dim=K.dim, radius=K.radius * t, **flags)
    if kind == BodyKind.BOX:
        return ConvexBody.build(kind=kind, half_widths=K.half_widths * t, **flags)
    if kind == BodyKind.ELLIPSOID:
        return ConvexBody.build(kind=kind, semi_axes=K.semi_axes * t, **flags)
    if kind == BodyKind.HPOLYTOPE:
        return ConvexBody.build(kind=kind, normals=K.normals, offsets=K.offsets * t, **flags)
    return ConvexBody.build(kind=kind, grid=K.grid, values=K.values * t, **flags)


def _common_grid(K: ConvexBody, L: ConvexBody, grid: Optional[DirectionGrid]) -> DirectionGrid:
    if grid is not None:
        return grid
    if K.kind == BodyKind.SUPPORT_GRID:
        return K.grid
    if L.kind == BodyKind.SUPPORT_GRID:
        return L.grid
    return DirectionGrid.default(K.dim)


def _same_fan(K: ConvexBody, L: ConvexBody) -> bool:
    return (
        K.kind == BodyKind.HPOLYTOPE
        and L.kind == BodyKind.HPOLYTOPE
        and K.normals.shape == L.normals.shape
        and bool(np.allclose(K.normals, L.normals, atol=1e-14, rtol=0.0))
    )


def _hull_of_vertex_sums(
    K: ConvexBody, L: ConvexBody, wK: float, wL: float, flags: Dict[str, bool]
) -> ConvexBody:
    """n=3 の H多面体：頂点和の凸包 conv{wK·v + wL·w}"""
    vK, vL = hpolytope_vertices(K), hpolytope_vertices(L)
    points = (wK * vK[:, None, :] + wL * vL[None, :, :]).reshape(-1, K.dim)
    hull = ConvexHull(np.unique(np.round(points, 12), axis=0))
    # equations: normal·x + c ≤ 0、normal は単位ベクトル
    facets = np.unique(np.round(hull.equations, 10), axis=0)
    return ConvexBody.build(kind=BodyKind.HPOLYTOPE, normals=facets[:, :-1], offsets=-facets[:, -1], **flags)


def _linear_combination(
    K: ConvexBody, L: ConvexBody, wK: float, wL: float, grid: Optional[DirectionGrid]
) -> ConvexBody:
    if K.dim != L.dim:
        raise DimensionMismatchError(f"次元が一致しません: {K.dim} ≠ {L.dim}")
    flags = {
        "is_symmetric": K.is_symmetric and L.is_symmetric,
        "contains_origin": K.contains_origin and L.contains_origin,
    }
    if K.kind == BodyKind.BALL and L.kind == BodyKind.BALL:
        return ConvexBody.build(kind=BodyKind.BALL, dim=K.dim, radius=wK * K.radius + wL * L.radius, **flags)
    if K.kind == BodyKind.BOX and L.kind == BodyKind.BOX:
        return ConvexBody.build(kind=BodyKind.BOX, half_widths=wK * K.half_widths + wL * L.half_widths, **flags)
    if K.kind == BodyKind.HPOLYTOPE and L.kind == BodyKind.HPOLYTOPE and K.dim == 3:
        return _hull_of_vertex_sums(K, L, wK, wL, flags)
    if _same_fan(K, L) and K.dim <= 2:
        # 平面の共通法線扇：締めたオフセットの結合
        tight_K = support_values(K, K.normals)
        tight_L = support_values(L, L.normals)
        return ConvexBody.build(
            kind=BodyKind.HPOLYTOPE, normals=K.normals, offsets=wK * tight_K + wL * tight_L, **flags
        )
    common = _common_grid(K, L, grid)
    values = wK * sample_support(K, common) + wL * sample_support(L, common)
    return ConvexBody.build(kind=BodyKind.SUPPORT_GRID, grid=common, values=values, **flags)


def minkowski_comb(
    K: ConvexBody, L: ConvexBody, lam: float, grid: Optional[DirectionGrid] = None
) -> ConvexBody:
    """λK + (1−λ)L（支持関数の線形性）"""
    if K.dim != L.dim:
        raise DimensionMismatchError(f"次元が一致しません: {K.dim} ≠ {L.dim}")
    if not 0.0 <= lam <= 1.0:
        raise InputError(f"λ は [0, 1] の範囲である必要があります: {lam}")
    if lam == 1.0:
        return K
    if lam == 0.0:
        return L
    return _linear_combination(K, L, lam, 1.0 - lam, grid)


def minkowski_sum(K: ConvexBody, L: ConvexBody, grid: Optional[DirectionGrid] = None) -> ConvexBody:
    """K ⊕ L（支持関数の和）"""
    return _linear_combination(K, L, 1.0, 1.0, grid)


# 2次元境界曲線

def boundary_curve_2d(K: ConvexBody, size: int = 720, rho_min: float = DEFAULT_RHO_MIN) -> BoundaryCurve2D:
    """境界の離散化 x(θ) = h u + h′u′、曲率半径 ρ = h + h″"""
    if K.dim != 2:
        raise InputError("境界曲線は n=2 のみです")
    grid = DirectionGrid.circle(size)
    theta, U = grid.angles, grid.directions
    delta = grid.delta

    if K.kind in (BodyKind.BALL, BodyKind.ELLIPSOID):
        a, b = (K.radius, K.radius) if K.kind == BodyKind.BALL else tuple(K.semi_axes)
        h = np.sqrt(a**2 * np.cos(theta) ** 2 + b**2 * np.sin(theta) ** 2)
        rho = a**2 * b**2 / h**3
        points = np.column_stack([a**2 * np.cos(theta), b**2 * np.sin(theta)]) / h[:, None]
        _require_c2plus(theta, rho, rho_min)
        return BoundaryCurve2D(
            kind=CurveKind.ANALYTIC, angles=theta, support=h, points=points, normals=U,
            rho=rho, delta=delta, rho_min=rho_min,
        )

    values = sample_support(K, grid)
    rho = edge_lengths(values, delta) / delta
    _require_c2plus(theta, rho, rho_min)
    vertices = grid_vertices(theta, values, delta)
    points = 0.5 * (np.roll(vertices, 1, axis=0) + vertices)
    return BoundaryCurve2D(
        kind=CurveKind.POLYGON, angles=theta, support=values, points=points, normals=U,
        rho=rho, delta=delta, rho_min=rho_min, vertices=vertices,
    )


def _require_c2plus(theta: np.ndarray, rho: np.ndarray, rho_min: float) -> None:
    worst = int(np.argmin(rho))
    if rho[worst] < rho_min:
        raise NotC2PlusError(angle=float(theta[worst]), rho=float(rho[worst]), rho_min=rho_min)


# 一径数族

def validate_family(family: BodyFamily, rho_min: float = DEFAULT_RHO_MIN) -> None:
    """h + sψ が区間全体で ρ ≥ ρ_min（ρ は s に線形なので端点で十分）"""
    delta = family.base.grid.delta
    for s in (family.s_min, family.s_max):
        rho = edge_lengths(family.support_values(s), delta) / delta
        if np.min(rho) < rho_min:
            raise FamilyInvalidError(s, f"(min ρ={float(np.min(rho)):.3e})")


def family_member(family: BodyFamily, s: float) -> ConvexBody:
    """族の要素 K_s"""
    return ConvexBody.support_grid(family.base.grid, family.support_values(s))


# ファクトリ

def square(half_width: float = 1.0) -> ConvexBody:
    """正方形 |x|∞ ≤ a（H多面体）"""
    normals = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    body = ConvexBody.hpolytope(normals, np.full(4, float(half_width)))
    return body.model_copy(update={"label": f"square({half_width:g})"})


def smoothed_square(eps: float = DEFAULT_SMOOTHING, size: int = 720, half_width: float = 1.0) -> ConvexBody:
    """正方形 ⊕ εB（転がり球による平滑化）"""
    if eps <= 0:
        raise InputError(f"平滑化半径は正である必要があります: {eps}")
    body = minkowski_sum(square(half_width), ConvexBody.ball(eps, dim=2), grid=DirectionGrid.circle(size))
    return body.model_copy(update={"label": f"smoothed-square({eps:g})"})


def interval(a: float, b: float) -> ConvexBody:
    """n=1 の区間 [−a, b]"""
    if -a > b:
        raise InputError(f"区間が空です: [{-a}, {b}]")
    body = ConvexBody.hpolytope(np.array([[1.0], [-1.0]]), np.array([b, a]))
    return body.model_copy(update={"label": f"interval({-a:g},{b:g})"})


def whole_space_proxy(dim: int) -> ConvexBody:
    """ℝⁿ の代理球 B(max(12, 6√n))"""
    body = ConvexBody.ball(max(12.0, 6.0 * math.sqrt(dim)), dim=dim)
    return body.model_copy(update={"label": f"proxy(R^{dim})"})


def trig_curvature_scale(delta: float) -> float:
    """定数支持関数のグリッド曲率 κ = 2(1−cosΔ)/(ΔsinΔ)"""
    return 2.0 * (1.0 - math.cos(delta)) / (delta * math.sin(delta))


def harmonic_body(
    a0: float,
    coefficients: np.ndarray,
    orders: Sequence[int],
    grid: DirectionGrid,
    symmetric: bool,
    h_min: float = 0.05,
    rho_min: float = 1e-3,
) -> ConvexBody:
    """
    調和係数から SupportGrid を構成

    h(θ) = a₀ + Σ (aₖ cos kθ + bₖ sin kθ)。ρ ≥ ρ_min と h ≥ h_min を満たすまで
    a₀ を引き上げる（球のミンコフスキー加算）。

    Args:
        a0: 定数項
        coefficients: (len(orders), 2) の (aₖ, bₖ)
        orders: 調和次数
        grid: n=2 の角度グリッド
        symmetric: 原点対称クラスか
        h_min: 支持値の下限
        rho_min: 曲率半径の下限
    """
    theta = grid.angles
    coeffs = np.asarray(coefficients, dtype=float).reshape(len(orders), 2)
    rest = np.zeros(grid.size)
    for k, (ak, bk) in zip(orders, coeffs):
        rest += ak * np.cos(k * theta) + bk * np.sin(k * theta)
    delta = grid.delta
    rho_rest = edge_lengths(rest, delta) / delta
    needed = max(
        a0,
        (rho_min - float(np.min(rho_rest))) / trig_curvature_scale(delta),
        h_min - float(np.min(rest)),
    )
    values = needed + rest
    if symmetric:
        half = grid.size // 2
        values = 0.5 * (values + np.roll(values, -half))
    return ConvexBody.support_grid(grid, values, is_symmetric=symmetric or None)


# 乱数凸体生成

def _random_unit(gen: np.random.Generator, count: int, dim: int) -> np.ndarray:
    v = gen.standard_normal((count, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_symmetric_hpolytope(
    gen: np.random.Generator, dim: int, facet_pairs: int = 6, offset_range: Tuple[float, float] = (0.3, 2.0)
) -> ConvexBody:
    """原点対称なランダム H多面体（±eᵢ を含み有界）"""
    extra = max(facet_pairs - dim, 0)
    half = np.vstack([np.eye(dim), _random_unit(gen, extra, dim)])
    offsets = gen.uniform(*offset_range, size=half.shape[0])
    return ConvexBody.hpolytope(np.vstack([half, -half]), np.concatenate([offsets, offsets]), is_symmetric=True)


def random_origin_hpolytope(
    gen: np.random.Generator, dim: int, facets: int = 10, h_min: float = 0.05, h_max: float = 2.0
) -> ConvexBody:
    """原点を含むランダム H多面体"""
    extra = max(facets - 2 * dim, 0)
    normals = np.vstack([np.eye(dim), -np.eye(dim), _random_unit(gen, extra, dim)])
    offsets = gen.uniform(h_min, h_max, size=normals.shape[0])
    return ConvexBody.hpolytope(normals, offsets)


def random_fan_pair(
    gen: np.random.Generator, dim: int, symmetric: bool, facets: int = 12, h_min: float = 0.05, h_max: float = 2.0
) -> Tuple[ConvexBody, ConvexBody]:
    """共通法線扇を持つランダム H多面体の組"""
    if symmetric:
        half = np.vstack([np.eye(dim), _random_unit(gen, max(facets // 2 - dim, 0), dim)])
        normals = np.vstack([half, -half])
        bodies = []
        for _ in range(2):
            offsets = gen.uniform(max(h_min, 0.3), h_max, size=half.shape[0])
            bodies.append(ConvexBody.hpolytope(normals, np.concatenate([offsets, offsets]), is_symmetric=True))
        return bodies[0], bodies[1]
    normals = np.vstack([np.eye(dim), -np.eye(dim), _random_unit(gen, max(facets - 2 * dim, 0), dim)])
    K = ConvexBody.hpolytope(normals, gen.uniform(h_min, h_max, size=normals.shape[0]))
    L = ConvexBody.hpolytope(normals, gen.uniform(h_min, h_max, size=normals.shape[0]))
    return K, L


def random_harmonic_body(
    gen: np.random.Generator,
    symmetric: bool,
    orders: Optional[Sequence[int]] = None,
    grid: Optional[DirectionGrid] = None,
    amplitude: float = 0.6,
    a0_range: Tuple[float, float] = (0.4, 2.5),
    h_min: float = 0.05,
) -> ConvexBody:
    """ランダムな調和 SupportGrid（sym: 偶数次のみ）"""
    grid = grid or DirectionGrid.circle(720)
    if orders is None:
        orders = default_harmonic_orders(symmetric)
    orders = list(orders)
    scale = np.array([amplitude / k for k in orders])
    coeffs = gen.uniform(-1.0, 1.0, size=(len(orders), 2)) * scale[:, None]
    a0 = float(gen.uniform(*a0_range))
    return harmonic_body(a0, coeffs, orders, grid, symmetric=symmetric, h_min=h_min)


def default_harmonic_orders(symmetric: bool, max_order: int = 8) -> List[int]:
    """sym は偶数次、origin は全次数"""
    if symmetric:
        return list(range(2, max_order + 1, 2))
    return list(range(1, max_order + 1))
