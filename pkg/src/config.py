# src/config.py
import os
import math
import logging
from dataclasses import dataclass, field
from typing import List, Optional

from dotenv import load_dotenv

from src.errors import ConfigError, InvalidParams

# 環境変数の読み込み
load_dotenv()

logger = logging.getLogger("extremal_zeta.config")


def validate_alpha(alpha: float) -> float:
    """α が 1/2 < α ≤ 1 を満たすか検証する"""
    if not isinstance(alpha, (int, float)) or not math.isfinite(alpha) or not (0.5 < alpha <= 1.0):
        raise InvalidParams(f"alpha は 1/2 < alpha <= 1 を満たす必要があります: {alpha}")
    return float(alpha)


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 200
    truncation_radius: float = 400.0  # 広義積分の打ち切り半径

    def __post_init__(self):
        if not (self.abs_tol > 0):
            raise InvalidParams(f"abs_tol は正である必要があります: {self.abs_tol}")
        if not (self.rel_tol >= 0):
            raise InvalidParams(f"rel_tol は非負である必要があります: {self.rel_tol}")
        if self.max_subdivisions < 1:
            raise InvalidParams(f"max_subdivisions は 1 以上である必要があります: {self.max_subdivisions}")
        if not (self.truncation_radius > 0):
            raise InvalidParams(f"truncation_radius は正である必要があります: {self.truncation_radius}")

    @classmethod
    def from_config(cls, config: "AppConfig") -> "QuadratureSpec":
        return cls(
            abs_tol=config.quad_abs_tol,
            rel_tol=config.quad_rel_tol,
            max_subdivisions=config.quad_max_subdivisions,
            truncation_radius=config.quad_truncation_radius,
        )


class AppConfig:
    def __init__(self):
        # データ配置
        self.data_dir = os.getenv("EXTREMAL_ZETA_DATA", "./data")
        self.db_path = os.getenv("EXTREMAL_ZETA_DB", os.path.join(self.data_dir, "results.db"))
        self.zero_file = os.getenv("ZERO_FILE", os.path.join(self.data_dir, "zeros_low.txt"))
        self.sieve_cache = os.getenv("SIEVE_CACHE", os.path.join(self.data_dir, "von_mangoldt.csv"))

        # 数値計算の既定値
        self.sieve_limit = int(os.getenv("SIEVE_LIMIT", "600"))
        self.node_count = int(os.getenv("NODE_COUNT", "40"))                       # 補間節点の余裕
        self.quad_abs_tol = float(os.getenv("QUAD_ABS_TOL", "1e-10"))
        self.quad_rel_tol = float(os.getenv("QUAD_REL_TOL", "1e-10"))
        self.quad_max_subdivisions = int(os.getenv("QUAD_MAX_SUBDIVISIONS", "200"))
        self.quad_truncation_radius = float(os.getenv("QUAD_TRUNCATION_RADIUS", "400"))

        # 実行環境
        self.log_level = os.getenv("LOG_LEVEL", "INFO")
        self.log_dir = os.getenv("LOG_DIR", "./logs")
        self.max_workers = int(os.getenv("MAX_WORKERS", "4"))                       # 並列評価のスレッド数

    def quadrature_spec(self) -> QuadratureSpec:
        return QuadratureSpec.from_config(self)


@dataclass
class RunConfig:
    command: str
    alpha: Optional[float] = None
    delta: Optional[float] = None
    kind: str = "minorant"
    t_values: List[float] = field(default_factory=list)
    x_values: List[float] = field(default_factory=list)
    xi_values: List[float] = field(default_factory=list)
    zeros_path: Optional[str] = None
    sieve_limit: int = 600
    output: str = "json"
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    node_count: int = 40
    want_ft: bool = False
    want_l1: bool = False
    numeric: bool = False
    with_actual: bool = False
    check: bool = False
    littlewood: bool = False
    height: Optional[float] = None
    out_path: Optional[str] = None
    store: bool = True
    quick: bool = False

    def validate(self) -> "RunConfig":
        """設定値を検証する（失敗時は ConfigError 系の例外）"""
        if self.alpha is not None:
            validate_alpha(self.alpha)
        if self.delta is not None and not (self.delta > 0 and math.isfinite(self.delta)):
            raise InvalidParams(f"delta は正である必要があります: {self.delta}")
        if self.kind not in ("minorant", "majorant"):
            raise InvalidParams(f"kind は minorant か majorant です: {self.kind}")
        if self.output not in ("json", "csv"):
            raise ConfigError(f"出力形式が不正です: {self.output}")
        if not (self.abs_tol > 0):
            raise ConfigError(f"abs_tol は正である必要があります: {self.abs_tol}")
        if not (self.rel_tol >= 0):
            raise ConfigError(f"rel_tol は非負である必要があります: {self.rel_tol}")
        if self.node_count < 1:
            raise InvalidParams(f"node_count は 1 以上である必要があります: {self.node_count}")

        if self.command in ("explicit-formula", "bounds") and not self.t_values:
            raise ConfigError("t のグリッドが空です")
        if self.command == "explicit-formula" and (self.alpha is None or self.delta is None):
            raise ConfigError("explicit-formula には --alpha と --delta が必要です")
        if self.command == "bounds" and self.alpha is None and not self.littlewood:
            raise ConfigError("bounds には --alpha か --littlewood が必要です")
        if self.command == "eval":
            if self.alpha is None or self.delta is None:
                raise ConfigError("eval には --alpha と --delta が必要です")
            if not (self.x_values or self.xi_values or self.want_l1 or self.want_ft):
                raise ConfigError("eval の評価対象 (--x, --xi, --ft, --l1) がありません")
        if self.command == "zeros" and not (self.height and self.height > 20):
            raise ConfigError(f"zeros には 20 より大きい --height が必要です: {self.height}")

        # --zeros を省略した場合は同梱の表を生成で延長する
        if self.zeros_path is not None and not os.path.exists(self.zeros_path):
            raise ConfigError(f"零点ファイルが見つかりません: {self.zeros_path}")
        if self.command == "sieve" and not (2 <= self.sieve_limit <= 10 ** 8):
            raise ConfigError(f"篩の上限は 2 以上 1e8 以下です: {self.sieve_limit}")

        logger.debug(f"設定を検証しました: command={self.command}")
        return self

    def quadrature_spec(self, config: AppConfig) -> QuadratureSpec:
        return QuadratureSpec(
            abs_tol=self.abs_tol,
            rel_tol=self.rel_tol,
            max_subdivisions=config.quad_max_subdivisions,
            truncation_radius=config.quad_truncation_radius,
        )
