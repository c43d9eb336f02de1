"""
凸体モデル

方向グリッド、凸体の表現（H多面体・支持関数グリッド・解析的プリミティブ）、
摂動と一径数族を表現します。幾何クエリは src.engines.bodies にあります。
"""

import math
from enum import Enum
from typing import Any, Callable, Dict, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, ValidationError, model_validator
from scipy.stats import norm, qmc

from src.exceptions import InputError

# 許容誤差
UNIT_TOL = 1e-12
SYMMETRY_TOL = 1e-10
CURVATURE_TOL = -1e-8


def _frozen_array(value: Any, ndim: Optional[int] = None) -> np.ndarray:
    arr = np.array(value, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"{ndim}次元配列が必要です（{arr.ndim}次元）")
    if not np.all(np.isfinite(arr)):
        raise ValueError("有限でない値を含みます")
    arr.flags.writeable = False
    return arr


class DirectionGrid(BaseModel):
    """単位球面上の方向グリッド"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dim: int = Field(..., ge=1, description="次元 n")
    directions: np.ndarray = Field(..., description="単位ベクトル (M, n)")
    angles: Optional[np.ndarray] = Field(None, description="n=2 の角度 θⱼ")
    seed: Optional[int] = Field(None, description="n≥3 の生成シード")

    @model_validator(mode="after")
    def _check_unit(self) -> "DirectionGrid":
        if self.directions.ndim != 2 or self.directions.shape[1] != self.dim:
            raise ValueError("directions の形状が次元と一致しません")
        norms = np.linalg.norm(self.directions, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_TOL):
            raise ValueError("単位ベクトルでない方向を含みます")
        return self

    @classmethod
    def line(cls) -> "DirectionGrid":
        """n=1 のグリッド {+1, −1}"""
        return cls(dim=1, directions=_frozen_array([[1.0], [-1.0]]))

    @classmethod
    def circle(cls, size: int = 720) -> "DirectionGrid":
        """n=2 の等間隔角度グリッド θⱼ = 2πj/M"""
        if size < 8:
            raise InputError(f"角度グリッドは8点以上必要です: {size}")
        theta = 2.0 * np.pi * np.arange(size) / size
        dirs = np.column_stack([np.cos(theta), np.sin(theta)])
        return cls(dim=2, directions=_frozen_array(dirs), angles=_frozen_array(theta))

    @classmethod
    def sphere(cls, dim: int, size: int = 2048, seed: int = 0) -> "DirectionGrid":
        """n≥3 の準一様グリッド（Sobol 点を正規分位点で写像、負方向で閉包）"""
        if dim < 3:
            raise InputError("sphere グリッドは n≥3 用です")
        half = max(size // 2, 1)
        sampler = qmc.Sobol(d=dim, scramble=True, seed=seed)
        points = sampler.random(half)
        points = np.clip(points, 1e-12, 1.0 - 1e-12)
        gauss = norm.ppf(points)
        gauss /= np.linalg.norm(gauss, axis=1, keepdims=True)
        dirs = np.vstack([gauss, -gauss])
        return cls(dim=dim, directions=_frozen_array(dirs), seed=seed)

    @classmethod
    def default(cls, dim: int, circle_size: int = 720, sphere_size: int = 2048) -> "DirectionGrid":
        if dim == 1:
            return cls.line()
        if dim == 2:
            return cls.circle(circle_size)
        return cls.sphere(dim, sphere_size)

    @property
    def size(self) -> int:
        return int(self.directions.shape[0])

    @property
    def delta(self) -> float:
        """角度間隔 Δθ (n=2)"""
        return 2.0 * math.pi / self.size

    def is_closed_under_negation(self) -> bool:
        if self.dim == 2:
            return self.size % 2 == 0
        neg = -self.directions
        dots = neg @ self.directions.T
        return bool(np.all(np.max(dots, axis=1) > 1.0 - 1e-12))

    def same_as(self, other: "DirectionGrid") -> bool:
        return (
            self.dim == other.dim
            and self.size == other.size
            and bool(np.allclose(self.directions, other.directions, atol=1e-14, rtol=0.0))
        )

    def to_dict(self) -> Dict[str, Any]:
        return {"dim": self.dim, "size": self.size, "seed": self.seed}


class BodyKind(str, Enum):
    """凸体の表現タグ"""
    HPOLYTOPE = "hpolytope"        # H表現多面体
    SUPPORT_GRID = "supportgrid"   # 支持関数グリッド
    BALL = "ball"                  # 球
    BOX = "box"                    # 軸平行な箱
    ELLIPSOID = "ellipsoid"        # 軸平行な楕円体


def discrete_curvature(values: np.ndarray, delta: float) -> np.ndarray:
    """離散曲率半径 ρⱼ = hⱼ + (hⱼ₊₁ − 2hⱼ + hⱼ₋₁)/Δθ²"""
    return values + (np.roll(values, -1) - 2.0 * values + np.roll(values, 1)) / delta**2


class ConvexBody(BaseModel):
    """凸体（表現のタグ付き和）"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: BodyKind = Field(..., description="表現")
    dim: int = Field(..., ge=1, description="次元 n")

    # HPolytope
    normals: Optional[np.ndarray] = Field(None, description="単位法線 aᵢ (m, n)")
    offsets: Optional[np.ndarray] = Field(None, description="オフセット bᵢ")

    # SupportGrid
    grid: Optional[DirectionGrid] = Field(None, description="方向グリッド")
    values: Optional[np.ndarray] = Field(None, description="支持関数値 hⱼ")

    # プリミティブ
    radius: Optional[float] = Field(None, gt=0, description="球の半径")
    half_widths: Optional[np.ndarray] = Field(None, description="箱の半幅")
    semi_axes: Optional[np.ndarray] = Field(None, description="楕円体の半軸")

    # フラグ
    is_symmetric: bool = Field(default=False, description="原点対称か")
    contains_origin: bool = Field(default=True, description="原点を含むか")
    label: Optional[str] = Field(None, description="表示用ラベル")

    _cache: Dict[str, Any] = PrivateAttr(default_factory=dict)

    @model_validator(mode="before")
    @classmethod
    def _normalize(cls, data: Any) -> Any:
        """配列化・法線正規化・フラグ自動判定"""
        if not isinstance(data, dict):
            return data
        data = dict(data)
        kind = BodyKind(data["kind"])

        if kind == BodyKind.HPOLYTOPE:
            normals = _frozen_array(data["normals"], ndim=2)
            offsets = np.array(data["offsets"], dtype=float).reshape(-1)
            if normals.shape[0] != offsets.shape[0]:
                raise ValueError("normals と offsets の個数が一致しません")
            lengths = np.linalg.norm(normals, axis=1)
            if np.any(lengths <= 0):
                raise ValueError("零ベクトルの法線があります")
            data["normals"] = _frozen_array(normals / lengths[:, None])
            data["offsets"] = _frozen_array(offsets / lengths)
            data.setdefault("dim", normals.shape[1])
        elif kind == BodyKind.SUPPORT_GRID:
            data["values"] = _frozen_array(data["values"], ndim=1)
            grid = data["grid"]
            data.setdefault("dim", grid.dim if isinstance(grid, DirectionGrid) else grid["dim"])
        elif kind == BodyKind.BOX:
            data["half_widths"] = _frozen_array(data["half_widths"], ndim=1)
            data.setdefault("dim", len(data["half_widths"]))
        elif kind == BodyKind.ELLIPSOID:
            data["semi_axes"] = _frozen_array(data["semi_axes"], ndim=1)
            data.setdefault("dim", len(data["semi_axes"]))

        if data.get("contains_origin") is None:
            data["contains_origin"] = cls._origin_flag(kind, data)
        if data.get("is_symmetric") is None:
            data["is_symmetric"] = cls._symmetry_flag(kind, data)
        return data

    @staticmethod
    def _origin_flag(kind: BodyKind, data: Dict[str, Any]) -> bool:
        if kind == BodyKind.HPOLYTOPE:
            return bool(np.all(data["offsets"] >= 0.0))
        if kind == BodyKind.SUPPORT_GRID:
            return bool(np.all(data["values"] >= 0.0))
        return True

    @staticmethod
    def _symmetry_flag(kind: BodyKind, data: Dict[str, Any]) -> bool:
        if kind in (BodyKind.BALL, BodyKind.BOX, BodyKind.ELLIPSOID):
            return True
        if kind == BodyKind.HPOLYTOPE:
            return _hpolytope_is_symmetric(data["normals"], data["offsets"])
        grid = data["grid"]
        if isinstance(grid, dict):
            return False
        return _grid_is_symmetric(grid, data["values"])

    @model_validator(mode="after")
    def _check_representation(self) -> "ConvexBody":
        kind = self.kind
        if kind == BodyKind.BALL and self.radius is None:
            raise ValueError("球には radius が必要です")
        if kind == BodyKind.BOX:
            if self.half_widths is None or np.any(self.half_widths <= 0):
                raise ValueError("箱の半幅は正である必要があります")
        if kind == BodyKind.ELLIPSOID:
            if self.semi_axes is None or np.any(self.semi_axes <= 0):
                raise ValueError("楕円体の半軸は正である必要があります")
        if kind == BodyKind.HPOLYTOPE and self.normals.shape[1] != self.dim:
            raise ValueError("法線の次元が一致しません")
        if kind == BodyKind.SUPPORT_GRID:
            if self.grid.dim != self.dim or self.grid.size != self.values.shape[0]:
                raise ValueError("支持関数値とグリッドが一致しません")
            if self.dim == 2:
                rho = discrete_curvature(self.values, self.grid.delta)
                worst = int(np.argmin(rho))
                if rho[worst] < CURVATURE_TOL:
                    raise ValueError(
                        f"支持関数が不正です: ρ={rho[worst]:.3e} (θ={self.grid.angles[worst]:.6f})"
                    )
        if self.is_symmetric and not self._symmetry_flag(kind, self.__dict__):
            raise ValueError("is_symmetric が指定されていますが対称ではありません")
        if self.contains_origin and not self._origin_flag(kind, self.__dict__):
            raise ValueError("contains_origin が指定されていますが原点を含みません")
        return self

    # ファクトリ

    @classmethod
    def build(cls, **kwargs: Any) -> "ConvexBody":
        """検証エラーを InputError に変換して構築"""
        kwargs.setdefault("is_symmetric", None)
        kwargs.setdefault("contains_origin", None)
        try:
            return cls(**kwargs)
        except ValidationError as e:
            raise InputError(f"凸体の構築に失敗しました: {e.errors()[0]['msg']}") from e

    @classmethod
    def ball(cls, radius: float, dim: int = 2) -> "ConvexBody":
        if radius <= 0:
            raise InputError(f"半径は正である必要があります: {radius}")
        return cls.build(kind=BodyKind.BALL, dim=dim, radius=float(radius))

    @classmethod
    def box(cls, half_widths: Any) -> "ConvexBody":
        return cls.build(kind=BodyKind.BOX, half_widths=half_widths)

    @classmethod
    def ellipsoid(cls, semi_axes: Any) -> "ConvexBody":
        return cls.build(kind=BodyKind.ELLIPSOID, semi_axes=semi_axes)

    @classmethod
    def hpolytope(cls, normals: Any, offsets: Any, **flags: Any) -> "ConvexBody":
        return cls.build(kind=BodyKind.HPOLYTOPE, normals=normals, offsets=offsets, **flags)

    @classmethod
    def support_grid(cls, grid: DirectionGrid, values: Any, **flags: Any) -> "ConvexBody":
        return cls.build(kind=BodyKind.SUPPORT_GRID, grid=grid, values=values, **flags)

    # 補助

    def cached(self, key: str, factory: Callable[[], Any]) -> Any:
        """派生データをキャッシュ（値は不変とみなす）"""
        if key not in self._cache:
            self._cache[key] = factory()
        return self._cache[key]

    def describe(self) -> str:
        if self.label:
            return self.label
        if self.kind == BodyKind.BALL:
            return f"ball({self.radius:g}, n={self.dim})"
        if self.kind == BodyKind.BOX:
            return "box(" + ",".join(f"{w:g}" for w in self.half_widths) + ")"
        if self.kind == BodyKind.ELLIPSOID:
            return "ellipsoid(" + ",".join(f"{a:g}" for a in self.semi_axes) + ")"
        if self.kind == BodyKind.HPOLYTOPE:
            return f"hpolytope(m={self.normals.shape[0]}, n={self.dim})"
        return f"supportgrid(M={self.grid.size}, n={self.dim})"

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "type": self.kind.value,
            "dim": self.dim,
            "symmetric": self.is_symmetric,
            "contains_origin": self.contains_origin,
            "label": self.describe(),
        }
        if self.kind == BodyKind.BALL:
            data["radius"] = self.radius
        elif self.kind == BodyKind.BOX:
            data["half_widths"] = self.half_widths.tolist()
        elif self.kind == BodyKind.ELLIPSOID:
            data["semi_axes"] = self.semi_axes.tolist()
        elif self.kind == BodyKind.HPOLYTOPE:
            data["normals"] = self.normals.tolist()
            data["offsets"] = self.offsets.tolist()
        else:
            data["grid"] = self.grid.to_dict()
            data["values"] = self.values.tolist()
        return data


def _hpolytope_is_symmetric(normals: np.ndarray, offsets: np.ndarray) -> bool:
    dots = normals @ (-normals).T
    for i in range(normals.shape[0]):
        partners = np.where(dots[:, i] > 1.0 - 1e-12)[0]
        if not np.any(np.abs(offsets[partners] - offsets[i]) <= SYMMETRY_TOL * max(1.0, abs(offsets[i]))):
            return False
    return True


def _grid_is_symmetric(grid: DirectionGrid, values: np.ndarray) -> bool:
    if not grid.is_closed_under_negation():
        return False
    if grid.dim == 2:
        half = grid.size // 2
        return bool(np.all(np.abs(values - np.roll(values, -half)) <= SYMMETRY_TOL))
    partner = np.argmax(-grid.directions @ grid.directions.T, axis=1)
    return bool(np.all(np.abs(values - values[partner]) <= SYMMETRY_TOL))


class Perturbation(BaseModel):
    """方向グリッド上の摂動 ψ（周期3次スプラインで補間）"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: DirectionGrid = Field(..., description="n=2 の角度グリッド")
    values: np.ndarray = Field(..., description="ψ(θⱼ)")
    label: Optional[str] = Field(None, description="表示用ラベル")

    _cache: Dict[str, Any] = PrivateAttr(default_factory=dict)

    @model_validator(mode="before")
    @classmethod
    def _as_array(cls, data: Any) -> Any:
        if isinstance(data, dict) and "values" in data:
            data = dict(data)
            data["values"] = _frozen_array(data["values"], ndim=1)
        return data

    @model_validator(mode="after")
    def _check_grid(self) -> "Perturbation":
        if self.grid.dim != 2:
            raise ValueError("摂動は n=2 の角度グリッド上で定義します")
        if self.values.shape[0] != self.grid.size:
            raise ValueError("摂動値の個数がグリッドと一致しません")
        return self

    @classmethod
    def constant(cls, grid: DirectionGrid, value: float = 1.0) -> "Perturbation":
        return cls(grid=grid, values=np.full(grid.size, float(value)), label=f"const:{value:g}")

    @classmethod
    def harmonic(cls, grid: DirectionGrid, k: int, amplitude: float = 1.0, phase: str = "cos") -> "Perturbation":
        fn = np.cos if phase == "cos" else np.sin
        return cls(grid=grid, values=amplitude * fn(k * grid.angles), label=f"{phase}:{k}")

    def _spline(self) -> Any:
        from scipy.interpolate import CubicSpline

        if "spline" not in self._cache:
            theta = np.append(self.grid.angles, 2.0 * np.pi)
            self._cache["spline"] = CubicSpline(theta, np.append(self.values, self.values[0]), bc_type="periodic")
        return self._cache["spline"]

    def at(self, angles: np.ndarray) -> np.ndarray:
        return self._spline()(np.mod(angles, 2.0 * np.pi))

    def derivative_at(self, angles: np.ndarray) -> np.ndarray:
        """dψ/dθ"""
        return self._spline()(np.mod(angles, 2.0 * np.pi), 1)

    def second_derivative_at(self, angles: np.ndarray) -> np.ndarray:
        return self._spline()(np.mod(angles, 2.0 * np.pi), 2)

    def on_grid(self, grid: DirectionGrid) -> np.ndarray:
        if grid.same_as(self.grid):
            return np.array(self.values)
        return self.at(grid.angles)

    def is_even(self) -> bool:
        return _grid_is_symmetric(self.grid, self.values)

    def is_odd(self) -> bool:
        half = self.grid.size // 2
        return self.grid.size % 2 == 0 and bool(
            np.all(np.abs(self.values + np.roll(self.values, -half)) <= SYMMETRY_TOL)
        )

    def to_dict(self) -> Dict[str, Any]:
        return {"label": self.label, "grid": self.grid.to_dict(), "values": self.values.tolist()}


class BodyFamily(BaseModel):
    """一径数族 h_s = h + sψ (s ∈ I)"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    base: ConvexBody = Field(..., description="基準体 K（グリッド上の支持関数）")
    perturbation: Perturbation = Field(..., description="摂動 ψ")
    s_min: float = Field(..., description="区間の下端")
    s_max: float = Field(..., description="区間の上端")

    @model_validator(mode="after")
    def _check_interval(self) -> "BodyFamily":
        if self.s_min > self.s_max:
            raise ValueError("s_min ≤ s_max が必要です")
        if self.base.kind != BodyKind.SUPPORT_GRID or self.base.dim != 2:
            raise ValueError("族の基準体は n=2 の SupportGrid です")
        return self

    def psi_values(self) -> np.ndarray:
        return self.perturbation.on_grid(self.base.grid)

    def support_values(self, s: float) -> np.ndarray:
        return np.asarray(self.base.values) + s * self.psi_values()
