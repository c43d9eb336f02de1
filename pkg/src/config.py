"""
ラボ設定

環境変数（接頭辞 GZ_）と .env ファイルから既定値を読み込みます。
"""

from functools import lru_cache
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class LabSettings(BaseSettings):
    """実行時設定"""

    model_config = SettingsConfigDict(
        env_prefix="GZ_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # 積分
    default_budget: int = Field(default=2_000_000, ge=100, description="MCサンプル数の既定値")
    chunk_size: int = Field(default=4096, ge=1, description="MCチャンクサイズ（決定的な縮約単位）")
    workers: int = Field(default=4, ge=1, description="ワーカースレッド数")
    radial_directions: int = Field(default=720, ge=8, description="動径求積の方向数 (n=2)")
    sphere_directions: int = Field(default=2048, ge=16, description="準一様方向数 (n≥3)")
    quadrature_abs_tol: float = Field(default=1e-10, gt=0, description="適応求積の絶対許容誤差")

    # 判定
    verdict_floor: float = Field(default=1e-8, gt=0, description="決定的手法の判定に用いる最小標準誤差")

    # レポート・ログ
    reproducible_reports: bool = Field(default=False, description="実行時間を省きバイト同一のレポートを出力")
    log_level: str = Field(default="WARNING", description="ログレベル")
    log_format: Literal["console", "json"] = Field(default="console", description="ログ形式")


@lru_cache(maxsize=1)
def get_settings() -> LabSettings:
    """キャッシュされた設定を取得"""
    return LabSettings()
