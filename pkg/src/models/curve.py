"""
境界曲線モデル

2次元境界の離散化（点・法線・曲率半径・重み付き平均曲率）と、
1次元ノイマン問題 Lu = 1 の閉形式解プロファイルを表現します。
"""

import math
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import erf

from src.models.potential import Potential

# 辺上の Gauss–Legendre 点数
EDGE_NODES = 8


class CurveKind(str, Enum):
    """境界曲線の構成方法"""
    ANALYTIC = "analytic"    # 解析的な h, h′, h″
    POLYGON = "polygon"      # 支持値グリッドの多角形


class BoundaryCurve2D(BaseModel):
    """離散化された2次元境界"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: CurveKind = Field(..., description="構成方法")
    angles: np.ndarray = Field(..., description="法線角 θⱼ")
    support: np.ndarray = Field(..., description="h(θⱼ)")
    points: np.ndarray = Field(..., description="境界点 x(θⱼ) (M, 2)")
    normals: np.ndarray = Field(..., description="外向き法線 u(θⱼ) (M, 2)")
    rho: np.ndarray = Field(..., description="曲率半径 ρⱼ")
    delta: float = Field(..., gt=0, description="角度間隔 Δθ")
    rho_min: float = Field(default=1e-6, gt=0, description="曲率半径の下限")
    vertices: Optional[np.ndarray] = Field(None, description="多角形頂点 v_{j+1/2} (M, 2)")

    # ポテンシャル依存（with_potential で付与）
    potential_label: Optional[str] = Field(None, description="付与したポテンシャル")
    mean_curvature: Optional[np.ndarray] = Field(None, description="Hⱼ = 1/ρⱼ − ⟨∇V(xⱼ), nⱼ⟩")
    weights: Optional[np.ndarray] = Field(None, description="境界重み（正規化 e^{−V} の辺積分）")
    normal_flux: Optional[np.ndarray] = Field(None, description="辺上の ∫⟨∇V, uⱼ⟩e^{−V}ds")
    vertex_density: Optional[np.ndarray] = Field(None, description="頂点での e^{−V}/Z")

    @model_validator(mode="after")
    def _check_curvature(self) -> "BoundaryCurve2D":
        if np.any(self.rho < self.rho_min):
            raise ValueError("曲率半径が下限未満です")
        if self.weights is not None and not float(np.sum(self.weights)) > 0:
            raise ValueError("境界重みの総和が正ではありません")
        return self

    @property
    def size(self) -> int:
        return int(self.angles.shape[0])

    @property
    def has_potential(self) -> bool:
        return self.weights is not None

    def arclength(self) -> float:
        """Σρⱼ Δθ"""
        return float(np.sum(self.rho) * self.delta)

    def with_potential(self, potential: Potential) -> "BoundaryCurve2D":
        """ポテンシャル依存量（H・重み）を付与した複製"""
        grads = potential.grad(self.points)
        flux_at_nodes = np.sum(grads * self.normals, axis=1)
        mean_curvature = 1.0 / self.rho - flux_at_nodes
        log_z = potential.log_normalizer or 0.0

        if self.kind == CurveKind.ANALYTIC:
            density = np.exp(-potential.eval(self.points) - log_z)
            weights = density * self.rho * self.delta
            return self.model_copy(update={
                "potential_label": potential.describe(),
                "mean_curvature": mean_curvature,
                "weights": weights,
            })

        # 多角形：辺 j は v_{j−1/2} から v_{j+1/2}
        start = np.roll(self.vertices, 1, axis=0)
        end = self.vertices
        lengths = np.linalg.norm(end - start, axis=1)
        nodes, gl_weights = np.polynomial.legendre.leggauss(EDGE_NODES)
        tau = 0.5 * (nodes + 1.0)
        gl_weights = 0.5 * gl_weights
        pts = start[:, None, :] + tau[None, :, None] * (end - start)[:, None, :]
        flat = pts.reshape(-1, 2)
        dens = np.exp(-potential.eval(flat) - log_z).reshape(self.size, EDGE_NODES)
        flux = np.sum(potential.grad(flat).reshape(self.size, EDGE_NODES, 2) * self.normals[:, None, :], axis=2)
        weights = lengths * (dens @ gl_weights)
        normal_flux = lengths * ((flux * dens) @ gl_weights)
        vertex_density = np.exp(-potential.eval(self.vertices) - log_z)
        return self.model_copy(update={
            "potential_label": potential.describe(),
            "mean_curvature": mean_curvature,
            "weights": weights,
            "normal_flux": normal_flux,
            "vertex_density": vertex_density,
        })

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "kind": self.kind.value,
            "size": self.size,
            "delta": self.delta,
            "rho_min_observed": float(np.min(self.rho)),
            "arclength": self.arclength(),
        }
        if self.weights is not None:
            data["potential"] = self.potential_label
            data["total_weight"] = float(np.sum(self.weights))
        return data


def neumann_first_derivative(t: np.ndarray) -> np.ndarray:
    """u′(t) = e^{t²/2}∫₀ᵗe^{−s²/2}ds"""
    t = np.asarray(t, dtype=float)
    return np.exp(0.5 * t**2) * math.sqrt(0.5 * math.pi) * erf(t / math.sqrt(2.0))


class OdeProfile(BaseModel):
    """1次元ノイマン問題 u″ − tu′ = 1 の閉形式解"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    R: float = Field(..., gt=0, description="区間 [−R, R] の半幅")
    nodes: np.ndarray = Field(..., description="ノード t")
    first: np.ndarray = Field(..., description="u′(t)")
    second: np.ndarray = Field(..., description="u″(t) = t·u′(t) + 1")

    @classmethod
    def build(cls, R: float, node_count: int = 201) -> "OdeProfile":
        nodes = np.linspace(-R, R, node_count)
        first = neumann_first_derivative(nodes)
        second = nodes * first + 1.0
        return cls(R=R, nodes=nodes, first=first, second=second)

    def residual(self) -> float:
        """max |u″ − tu′ − 1| / max(1, |u″|)"""
        raw = np.abs(self.second - self.nodes * self.first - 1.0)
        return float(np.max(raw / np.maximum(1.0, np.abs(self.second))))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "R": self.R,
            "nodes": self.nodes.tolist(),
            "u_prime": self.first.tolist(),
            "u_second": self.second.tolist(),
            "residual": self.residual(),
        }
