# src/errors.py
from typing import Any, Dict, Optional


class ExtremalZetaError(Exception):
    """パッケージ共通の例外基底クラス"""

    exit_code = 1

    def __init__(self, message: str, detail: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.detail = detail or {}


# --- 設定・入力データのエラー (終了コード 2) ---

class ConfigError(ExtremalZetaError):
    exit_code = 2


class InvalidParams(ConfigError):
    """パラメータが許容範囲外"""


class DomainError(ConfigError):
    """関数の定義域外での評価"""


class LimitExceeded(ConfigError):
    """篩の上限が範囲外"""


class ParseError(ConfigError):
    """ファイルの書式エラー（行番号付き）"""

    def __init__(self, message: str, line_number: Optional[int] = None, path: Optional[str] = None):
        location = f"{path or '<input>'}:{line_number}" if line_number is not None else (path or "<input>")
        super().__init__(f"{location}: {message}", {"line_number": line_number, "path": path})
        self.line_number = line_number
        self.path = path


class MonotonicityError(ConfigError):
    """零点の縦座標が狭義単調増加でない"""


class MissingCoverage(ConfigError):
    """coverage_height の宣言がない、または零点が欠けている"""


class InsufficientCoverage(ConfigError):
    """零点表の被覆高さが足りない"""


class TableTooSmall(ConfigError):
    """フォン・マンゴルト表の上限が足りない"""


# --- 計算フラグ (終了コード 3) ---

class ComputationFlag(ExtremalZetaError):
    exit_code = 3


class SubdivisionLimitError(ComputationFlag):
    """求積が分割上限内で許容誤差に達しなかった"""


class SlowConvergenceError(ComputationFlag):
    """フーリエ k 級数の収束が遅すぎる"""


class AccuracyLossError(ComputationFlag):
    """Euler–Maclaurin の誤差見積もりが大きすぎる"""


class NearZeroSingularity(ComputationFlag):
    """|ζ| が小さすぎて log|ζ| が信頼できない"""


class NumericalFailure(ComputationFlag):
    """数値ライブラリが想定外の例外を送出した"""


# --- 数学的チェックの失敗 (終了コード 4) ---

class CheckFailure(ExtremalZetaError):
    exit_code = 4
