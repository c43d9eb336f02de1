"""
エンジンパッケージ - 次元付き Brunn–Minkowski 凹性ラボ

凸体・測度の演算と、積分・不等式判定・局所形式・反例探索の各エンジンを含みます。
"""

from .base_engine import BaseEngine, EngineCapability, EngineMetrics, EngineStatus
from .integrals import IntegrationEngine
from .inequalities import InequalityChecker, c_of_R, epsilon_opt, jensen_bound
from .localform import LocalFormEngine, alpha, beta, bochner_residual_1d, ode_profile
from .search import CounterexampleSearch, decode_pair, default_space, fan_space, harmonic_space, interval_space

__all__ = [
    # 基底クラス
    "BaseEngine",
    "EngineCapability",
    "EngineMetrics",
    "EngineStatus",

    # 具体的なエンジン
    "IntegrationEngine",
    "InequalityChecker",
    "LocalFormEngine",
    "CounterexampleSearch",

    # 純関数
    "c_of_R",
    "epsilon_opt",
    "jensen_bound",
    "alpha",
    "beta",
    "bochner_residual_1d",
    "ode_profile",

    # 探索空間
    "decode_pair",
    "default_space",
    "fan_space",
    "harmonic_space",
    "interval_space",
]
