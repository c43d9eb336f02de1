"""
例外階層

ラボ全体で使用するエラー型を定義します。
入力エラーは ValueError も継承するため、呼び出し側は標準的な捕捉も可能です。
"""

from typing import Optional


class LabError(Exception):
    """ラボエラー基底クラス"""
    pass


class InputError(LabError, ValueError):
    """入力エラー（不正な引数・範囲外の値）"""
    pass


class DimensionMismatchError(InputError):
    """次元不一致エラー"""
    pass


class SpecFileError(InputError):
    """仕様ファイルエラー（行・フィールド位置付き）"""

    def __init__(self, message: str, location: Optional[str] = None, path: Optional[str] = None):
        self.detail = message
        self.location = location
        self.path = path
        prefix = ":".join(part for part in (path, location) if part)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class PreconditionError(LabError):
    """前提条件エラー（原点を含まない、非対称など）"""
    pass


class NotC2PlusError(PreconditionError):
    """C²₊ でない境界（曲率半径が下限未満）"""

    def __init__(self, angle: float, rho: float, rho_min: float):
        self.angle = angle
        self.rho = rho
        self.rho_min = rho_min
        super().__init__(
            f"曲率半径 ρ={rho:.3e} < ρ_min={rho_min:.1e} (θ={angle:.6f})"
        )


class FamilyInvalidError(PreconditionError):
    """摂動族 h + sψ が区間上で不正"""

    def __init__(self, s: float, detail: str = ""):
        self.s = s
        super().__init__(f"s={s:.3e} で支持関数が不正です {detail}".rstrip())


class DegenerateInputError(LabError):
    """測度推定値が消失する退化入力"""
    pass


class LogConcavityViolationError(LabError):
    """μ′ = 0 かつ μ″ > 0（対数凹性と矛盾、数値バグの兆候）"""

    def __init__(self, first: float, second: float):
        self.first = first
        self.second = second
        super().__init__(f"対数凹性に矛盾: μ′={first:.3e}, μ″={second:.3e}")


class SearchDegenerateError(LabError):
    """全リスタートが評価に失敗"""
    pass
