"""
データモデル - gz-concavity-lab

凸体・ポテンシャル・推定値・レポート・探索のドメインモデルを含みます。
"""

from .body import BodyFamily, BodyKind, ConvexBody, DirectionGrid, Perturbation, discrete_curvature
from .curve import BoundaryCurve2D, CurveKind, OdeProfile
from .estimate import Estimate, EstimateMethod, MethodChoice, RngSpec, VectorEstimate
from .potential import BoundsReport, Potential, PotentialKind
from .report import (
    BochnerReport,
    CheckReport,
    GapReport,
    JensenReport,
    LocalConstantReport,
    ProfileReport,
    VariationReport,
    Verdict,
)
from .search import (
    OptimizerConfig,
    Parametrization,
    SearchClass,
    SearchObjective,
    SearchResult,
    SearchSpace,
    TrajectoryEntry,
)

__all__ = [
    # 凸体関連
    "BodyFamily",
    "BodyKind",
    "ConvexBody",
    "DirectionGrid",
    "Perturbation",
    "discrete_curvature",

    # 境界曲線関連
    "BoundaryCurve2D",
    "CurveKind",
    "OdeProfile",

    # 推定値関連
    "Estimate",
    "EstimateMethod",
    "MethodChoice",
    "RngSpec",
    "VectorEstimate",

    # ポテンシャル関連
    "BoundsReport",
    "Potential",
    "PotentialKind",

    # レポート関連
    "BochnerReport",
    "CheckReport",
    "GapReport",
    "JensenReport",
    "LocalConstantReport",
    "ProfileReport",
    "VariationReport",
    "Verdict",

    # 探索関連
    "OptimizerConfig",
    "Parametrization",
    "SearchClass",
    "SearchObjective",
    "SearchResult",
    "SearchSpace",
    "TrajectoryEntry",
]
