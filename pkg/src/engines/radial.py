"""
動径求積

原点を含む凸体上の積分を ∫_K g dμ = Σ_d w_d ∫₀^{r_d} g(ru_d)e^{−V(ru_d)}r^{n−1}dr/Z で評価します。
多角形は原点からの三角形扇（辺ごとの Gauss–Legendre）、滑らかな凸体は等間隔台形則。
内側の動径積分は二次ポテンシャルでは閉形式、それ以外は適応 Gauss–Kronrod (quad_vec)。
"""

import logging
import math
from typing import Callable, List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import quad_vec
from scipy.special import erf

from src.engines.bodies import polygon_vertices, radial_values
from src.exceptions import DegenerateInputError, InputError, PreconditionError
from src.models.body import BodyKind, ConvexBody, DirectionGrid
from src.models.potential import Potential

# ログ設定
logger = logging.getLogger(__name__)

MAX_EDGE_NODES = 256
MIN_EDGE_NODES = 4

Integrand = Callable[[np.ndarray], np.ndarray]


class RadialRule(BaseModel):
    """方向ノード・動径上限・角度重み"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dim: int
    directions: np.ndarray = Field(..., description="単位方向 (m, n)")
    extents: np.ndarray = Field(..., description="動径 r(u_d)")
    weights: np.ndarray = Field(..., description="角度重み")

    @property
    def size(self) -> int:
        return int(self.extents.shape[0])


def build_rule(K: ConvexBody, directions: int = 720) -> RadialRule:
    """凸体に応じた動径求積則を構成"""
    if not K.contains_origin:
        raise PreconditionError(f"動径求積には原点 ∈ K が必要です: {K.describe()}")
    if K.dim == 1:
        U = np.array([[1.0], [-1.0]])
        return RadialRule(dim=1, directions=U, extents=radial_values(K, U), weights=np.ones(2))
    if K.dim != 2:
        raise InputError(f"動径求積は n ≤ 2 のみです (n={K.dim})")
    if K.kind in (BodyKind.BALL, BodyKind.ELLIPSOID):
        grid = DirectionGrid.circle(directions)
        return RadialRule(
            dim=2,
            directions=grid.directions,
            extents=radial_values(K, grid.directions),
            weights=np.full(grid.size, grid.delta),
        )
    return _fan_rule(polygon_vertices(K), directions)


def _fan_rule(vertices: np.ndarray, directions: int) -> RadialRule:
    """
    原点からの三角形扇

    辺 (a, b) 上の点 p(τ) = a + τ(b−a) に対し
    ∫_tri g = det(a,b) ∫₀¹ dτ |p|⁻² ∫₀^{|p|} g(r p̂) r dr。
    見込み角が大きい辺は、1区間あたり約 MIN_EDGE_NODES·2π/directions になるよう分割する。
    """
    a = vertices
    b = np.roll(vertices, -1, axis=0)
    det = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    if np.any(det < -1e-12 * max(1.0, float(np.max(np.abs(det))))):
        raise DegenerateInputError("扇の向きが不正です（原点が多角形外）")

    angle = np.arctan2(np.maximum(det, 0.0), np.sum(a * b, axis=1))
    pieces = np.maximum(1, np.ceil(angle / (MIN_EDGE_NODES * 2.0 * math.pi / directions))).astype(int)
    owner = np.repeat(np.arange(a.shape[0]), pieces)
    offsets = np.concatenate([[0], np.cumsum(pieces)[:-1]])
    k = np.arange(owner.shape[0]) - offsets[owner]
    t0 = (k / pieces[owner])[:, None]
    t1 = ((k + 1) / pieces[owner])[:, None]
    span = (b - a)[owner]
    start = a[owner] + t0 * span
    end = a[owner] + t1 * span

    segments = start.shape[0]
    per_edge = int(min(MAX_EDGE_NODES, max(MIN_EDGE_NODES, math.ceil(directions / segments))))
    nodes, gl_weights = np.polynomial.legendre.leggauss(per_edge)
    tau = 0.5 * (nodes + 1.0)
    gl_weights = 0.5 * gl_weights

    seg_det = np.maximum(start[:, 0] * end[:, 1] - start[:, 1] * end[:, 0], 0.0)
    points = start[:, None, :] + tau[None, :, None] * (end - start)[:, None, :]
    points = points.reshape(-1, 2)
    lengths = np.linalg.norm(points, axis=1)
    safe = np.where(lengths > 0, lengths, 1.0)
    U = np.where(lengths[:, None] > 0, points / safe[:, None], np.array([1.0, 0.0]))
    weights = (seg_det[:, None] * gl_weights[None, :]).reshape(-1) / safe**2
    weights = np.where(lengths > 0, weights, 0.0)
    return RadialRule(dim=2, directions=U, extents=lengths, weights=weights)


def integrate_measure(P: Potential, rule: RadialRule, abs_tol: float = 1e-10) -> float:
    """μ(K)"""
    if P.is_quadratic:
        return float(rule.weights @ _quadratic_mass(P, rule))
    return float(integrate_functions(P, rule, [lambda x: np.ones(x.shape[0])], abs_tol)[0])


def _quadratic_mass(P: Potential, rule: RadialRule) -> np.ndarray:
    """V(ru) = r²q(u)/2 に対する閉形式 ∫₀^ρ e^{−r²q/2} r^{n−1} dr / Z"""
    c = P.quadratic_coefficients()
    q = (rule.directions**2) @ c
    rho = rule.extents
    z = P.normalizer()
    if rule.dim == 1:
        return np.sqrt(0.5 * math.pi / q) * erf(rho * np.sqrt(0.5 * q)) / z
    return -np.expm1(-0.5 * rho**2 * q) / q / z


def integrate_functions(
    P: Potential, rule: RadialRule, functions: List[Integrand], abs_tol: float = 1e-10
) -> np.ndarray:
    """∫_K fᵢ dμ（全方向を同時に s ∈ [0,1] で適応積分）"""
    if np.any(~np.isfinite(rule.extents)):
        raise DegenerateInputError("非有界な凸体の動径積分はできません")
    n = rule.dim
    rho = rule.extents
    U = rule.directions
    log_z = P.log_normalizer or 0.0
    scale = rho**n

    def integrand(s: float) -> np.ndarray:
        X = (s * rho)[:, None] * U
        base = scale * s ** (n - 1) * np.exp(-P.eval(X) - log_z)
        return np.stack([f(X) * base for f in functions])

    values, _ = quad_vec(integrand, 0.0, 1.0, epsabs=abs_tol, epsrel=1e-12, norm="max", limit=2000)
    return np.asarray(values) @ rule.weights

