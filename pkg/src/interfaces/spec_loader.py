"""
入力仕様ローダー

凸体・測度・摂動のインライン省略記法（ball:1, box:1,2, diag:1,4, cos:2 など）と
JSON 仕様ファイル、YAML の受け入れスイートを読み込みます。
不正なファイルは行・列またはフィールド位置付きの SpecFileError になります。
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.engines.bodies import harmonic_body, interval, smoothed_square, square, whole_space_proxy
from src.engines.measures import make_diag_quadratic, make_gaussian
from src.exceptions import InputError, LabError, SpecFileError
from src.models.body import ConvexBody, DirectionGrid, Perturbation
from src.models.potential import Potential

# ログ設定
logger = logging.getLogger(__name__)


class BodySpec(BaseModel):
    """凸体仕様ファイルのスキーマ"""

    model_config = ConfigDict(extra="forbid")

    kind: Literal[
        "ball", "box", "ellipsoid", "hpolytope", "support_grid", "harmonic", "square", "smoothed_square",
        "interval", "proxy",
    ] = Field(..., description="凸体の種類")
    dim: Optional[int] = Field(None, ge=1, description="次元（ball・proxy）")
    radius: Optional[float] = Field(None, gt=0)
    half_widths: Optional[List[float]] = None
    semi_axes: Optional[List[float]] = None
    normals: Optional[List[List[float]]] = None
    offsets: Optional[List[float]] = None
    values: Optional[List[float]] = Field(None, description="等間隔角度グリッド上の支持値")
    a0: Optional[float] = None
    coefficients: Optional[List[List[float]]] = Field(None, description="調和係数 (aₖ, bₖ)")
    orders: Optional[List[int]] = None
    symmetric: bool = False
    grid_size: int = Field(default=720, ge=8)
    eps: Optional[float] = Field(None, gt=0, description="平滑化半径")
    lower: Optional[float] = None
    upper: Optional[float] = None
    label: Optional[str] = None

    def require(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise SpecFileError(f"{self.kind} には {', '.join(missing)} が必要です", location=missing[0])

    def to_body(self) -> ConvexBody:
        kind = self.kind
        if kind == "ball":
            self.require("radius")
            body = ConvexBody.ball(self.radius, dim=self.dim or 2)
        elif kind == "box":
            self.require("half_widths")
            body = ConvexBody.box(self.half_widths)
        elif kind == "ellipsoid":
            self.require("semi_axes")
            body = ConvexBody.ellipsoid(self.semi_axes)
        elif kind == "hpolytope":
            self.require("normals", "offsets")
            body = ConvexBody.hpolytope(self.normals, self.offsets)
        elif kind == "support_grid":
            self.require("values")
            body = ConvexBody.support_grid(DirectionGrid.circle(len(self.values)), self.values)
        elif kind == "harmonic":
            self.require("a0", "coefficients", "orders")
            body = harmonic_body(
                self.a0, np.asarray(self.coefficients), self.orders, DirectionGrid.circle(self.grid_size),
                symmetric=self.symmetric,
            )
        elif kind == "square":
            body = square(self.radius or 1.0)
        elif kind == "smoothed_square":
            body = smoothed_square(self.eps or 0.1, size=self.grid_size)
        elif kind == "interval":
            self.require("lower", "upper")
            body = interval(-self.lower, self.upper)
        else:
            body = whole_space_proxy(self.dim or 2)
        if self.label:
            body = body.model_copy(update={"label": self.label})
        return body


class PerturbationSpec(BaseModel):
    """摂動仕様ファイルのスキーマ"""

    model_config = ConfigDict(extra="forbid")

    values: Optional[List[float]] = Field(None, description="等間隔角度グリッド上の ψ")
    harmonics: Optional[List[Dict[str, Any]]] = Field(None, description="[{k, amplitude, phase}]")
    constant: Optional[float] = None


# 省略記法

def _numbers(text: str, name: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"{name} の数値が不正です: {text}")


def _is_file(text: str) -> bool:
    return text.endswith((".json", ".yaml", ".yml")) or Path(text).is_file()


def parse_body(text: str, dim: int = 2) -> ConvexBody:
    """凸体の省略記法またはファイルパス"""
    if _is_file(text):
        return load_body_file(text)
    name, _, args = text.partition(":")
    name = name.strip().lower()
    values = _numbers(args, name) if args else []
    if name == "ball":
        if len(values) != 1:
            raise InputError("ball:r の形式です")
        return ConvexBody.ball(values[0], dim=dim)
    if name == "box":
        return ConvexBody.box(values)
    if name == "ellipse":
        if len(values) != 2:
            raise InputError("ellipse:a,b の形式です")
        return ConvexBody.ellipsoid(values)
    if name == "square":
        return square(values[0] if values else 1.0)
    if name == "smoothed-square":
        return smoothed_square(values[0] if values else 0.1)
    if name == "interval":
        if len(values) != 2:
            raise InputError("interval:lo,hi の形式です")
        return interval(-values[0], values[1])
    if name == "proxy":
        return whole_space_proxy(dim)
    raise InputError(f"不明な凸体の記法です: {text}")


def parse_measure(text: str, dim: int) -> Potential:
    """gaussian または diag:c1,...,cn"""
    name, _, args = text.partition(":")
    name = name.strip().lower()
    if name == "gaussian":
        return make_gaussian(dim)
    if name == "diag":
        coefficients = _numbers(args, "diag")
        if len(coefficients) != dim:
            raise InputError(f"diag の係数は {dim} 個必要です: {text}")
        return make_diag_quadratic(coefficients)
    raise InputError(f"不明な測度の記法です: {text}")


def parse_perturbation(text: str, grid: DirectionGrid) -> Perturbation:
    """one | const:v | cos:k | sin:k | JSON ファイル"""
    if _is_file(text):
        return load_perturbation_file(text, grid)
    name, _, args = text.partition(":")
    name = name.strip().lower()
    if name == "one":
        return Perturbation.constant(grid, 1.0)
    if name == "const":
        return Perturbation.constant(grid, _numbers(args, name)[0])
    if name in ("cos", "sin"):
        k = int(_numbers(args, name)[0])
        return Perturbation.harmonic(grid, k, phase=name)
    raise InputError(f"不明な摂動の記法です: {text}")


def parse_grid(text: str) -> List[float]:
    """"0.1,0.5,1" または "start:stop:step"（端点を含む）"""
    if text.count(":") == 2:
        start, stop, step = (float(v) for v in text.split(":"))
        if step <= 0 or stop < start:
            raise InputError(f"グリッド指定が不正です: {text}")
        count = int(round((stop - start) / step)) + 1
        return [round(start + i * step, 12) for i in range(count)]
    return _numbers(text, "grid")


# ファイル

def _read_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise SpecFileError("ファイルが見つかりません", path=path)
    except json.JSONDecodeError as e:
        raise SpecFileError(e.msg, location=f"line {e.lineno}, column {e.colno}", path=path)


def _field_error(e: ValidationError, path: str) -> SpecFileError:
    first = e.errors()[0]
    location = ".".join(str(part) for part in first["loc"]) or "root"
    return SpecFileError(first["msg"], location=location, path=path)


def load_body_file(path: str, key: Optional[str] = None) -> ConvexBody:
    """JSON の凸体仕様（key 指定時はその要素）"""
    data = _read_json(path)
    if key is not None:
        if not isinstance(data, dict) or key not in data:
            raise SpecFileError(f"'{key}' がありません", location=key, path=path)
        data = data[key]
    try:
        spec = BodySpec.model_validate(data)
    except ValidationError as e:
        raise _field_error(e, path)
    try:
        return spec.to_body()
    except SpecFileError as e:
        raise SpecFileError(e.detail, location=e.location, path=path)
    except LabError as e:
        raise SpecFileError(str(e), location="kind", path=path)


def load_body_pair(path: str) -> Tuple[ConvexBody, ConvexBody]:
    """{"K": ..., "L": ...}"""
    return load_body_file(path, "K"), load_body_file(path, "L")


def load_perturbation_file(path: str, grid: DirectionGrid) -> Perturbation:
    data = _read_json(path)
    try:
        spec = PerturbationSpec.model_validate(data)
    except ValidationError as e:
        raise _field_error(e, path)

    if spec.values is not None:
        source = DirectionGrid.circle(len(spec.values))
        psi = Perturbation(grid=source, values=spec.values, label=Path(path).name)
        return psi if source.same_as(grid) else Perturbation(grid=grid, values=psi.at(grid.angles), label=psi.label)
    total = np.full(grid.size, spec.constant or 0.0)
    for index, term in enumerate(spec.harmonics or []):
        try:
            k = int(term["k"])
            amplitude = float(term.get("amplitude", 1.0))
            phase = term.get("phase", "cos")
        except (KeyError, TypeError, ValueError):
            raise SpecFileError("調和項は {k, amplitude, phase} です", location=f"harmonics.{index}", path=path)
        total += Perturbation.harmonic(grid, k, amplitude, phase).values
    return Perturbation(grid=grid, values=total, label=Path(path).name)


def load_suite(path: str) -> Dict[str, Any]:
    """YAML の受け入れスイート"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except FileNotFoundError:
        raise SpecFileError("ファイルが見つかりません", path=path)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        location = f"line {mark.line + 1}, column {mark.column + 1}" if mark else None
        raise SpecFileError(str(e), location=location, path=path)
    if not isinstance(data, dict) or not isinstance(data.get("criteria"), list):
        raise SpecFileError("criteria の一覧が必要です", location="criteria", path=path)
    return data
