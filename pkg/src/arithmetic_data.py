# src/arithmetic_data.py
"""
数論側のデータとバックエンド

- フォン・マンゴルト関数 Λ(n) の篩と CSV キャッシュ
- ゼータ零点表の読み書きと検証、Z(t) の符号変化による零点生成
- Euler–Maclaurin 和による ζ(s) の評価
"""
import os
import math
import logging
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import bernoulli, loggamma

from src.errors import (
    AccuracyLossError,
    DomainError,
    LimitExceeded,
    MissingCoverage,
    MonotonicityError,
    NearZeroSingularity,
    ParseError,
)

logger = logging.getLogger("extremal_zeta.arithmetic_data")

SIEVE_MAX_LIMIT = 10 ** 8
FIRST_ZERO = 14.134725141734693
ZETA_MAX_HEIGHT = 1e5
# 生成した零点表のファイル名の接頭辞
GENERATED_PREFIX = "zeros_gen_"
# zeta_batch が一度に作る (点数 × 項数) 行列の上限
ZETA_BATCH_CELLS = 2_000_000
# Euler–Maclaurin の補正項は B_2 .. B_12 まで
EM_ORDER = 6
_B = bernoulli(2 * EM_ORDER + 2)
_EM_COEFFS = np.array([_B[2 * k] / math.factorial(2 * k) for k in range(1, EM_ORDER + 2)])


# ---------------------------------------------------------------------------
# フォン・マンゴルト表
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class VonMangoldtTable:
    limit: int
    values: np.ndarray = field(repr=False)  # values[n] = Λ(n), 長さ limit+1

    @property
    def entries(self) -> List[Tuple[int, float]]:
        """素数冪 n ≤ limit と Λ(n) の組"""
        support = np.nonzero(self.values)[0]
        return [(int(n), float(self.values[n])) for n in support]

    def __getitem__(self, n: int) -> float:
        if n < 0 or n > self.limit:
            raise LimitExceeded(f"n={n} は表の範囲外です (limit={self.limit})")
        return float(self.values[n])

    def prime_powers(self, upto: Optional[float] = None) -> np.ndarray:
        stop = self.limit if upto is None else min(self.limit, int(math.floor(upto)))
        support = np.nonzero(self.values[: stop + 1])[0]
        return support

    def chebyshev_psi(self, x: Optional[float] = None) -> float:
        """Σ_{n≤x} Λ(n)"""
        return math.fsum(self.values[self.prime_powers(x)])


def _smallest_prime_factors(limit: int) -> np.ndarray:
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in range(2, int(math.isqrt(limit)) + 1):
        if spf[p] == 0:
            block = spf[p * p:: p]
            block[block == 0] = p
    unmarked = spf == 0
    spf[unmarked] = np.arange(limit + 1)[unmarked]
    return spf


def sieve_von_mangoldt(limit: int) -> VonMangoldtTable:
    """最小素因数の篩から Λ(n) (n ≤ limit) を作る"""
    if not isinstance(limit, (int, np.integer)) or not (2 <= limit <= SIEVE_MAX_LIMIT):
        raise LimitExceeded(f"篩の上限は 2 ≤ N ≤ {SIEVE_MAX_LIMIT} です: {limit}")

    limit = int(limit)
    spf = _smallest_prime_factors(limit)
    n = np.arange(limit + 1)
    # n を最小素因数で割り切れるだけ割り、1 になれば素数冪
    rest = n.copy()
    rest[:2] = 0
    active = rest > 1
    while active.any():
        rest[active] //= spf[active]
        active &= (rest % np.where(spf > 0, spf, 1) == 0) & (rest > 1)
    is_power = (rest == 1) & (n >= 2)

    values = np.zeros(limit + 1, dtype=float)
    values[is_power] = np.log(spf[is_power].astype(float))
    logger.info(f"フォン・マンゴルト表を作成しました: N={limit}, 素数冪 {int(is_power.sum())} 個")
    return VonMangoldtTable(limit, values)


def save_sieve_cache(table: VonMangoldtTable, path: str) -> None:
    """'# limit=N' と 'n,lambda' ヘッダ付きの CSV (17 桁) で保存する"""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# limit={table.limit}\n")
        f.write("n,lambda\n")
        for n, value in table.entries:
            f.write(f"{n},{value:.17g}\n")
    logger.info(f"篩キャッシュを保存しました: {path}")


def load_sieve_cache(path: str) -> VonMangoldtTable:
    limit = None
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line[1:].strip().startswith("limit="):
                    try:
                        limit = int(line[1:].strip()[len("limit="):])
                    except ValueError:
                        raise ParseError(f"limit を読めません: {line}", line_number, path)
                continue
            if line == "n,lambda":
                continue
            try:
                n_text, value_text = line.split(",")
                rows.append((int(n_text), float(value_text)))
            except ValueError:
                raise ParseError(f"行の書式が不正です: {line}", line_number, path)

    if limit is None:
        raise ParseError("'# limit=N' 行がありません", None, path)
    values = np.zeros(limit + 1, dtype=float)
    for n, value in rows:
        if not 2 <= n <= limit:
            raise ParseError(f"n={n} が limit={limit} の範囲外です", None, path)
        values[n] = value
    return VonMangoldtTable(limit, values)


def load_or_build_sieve(limit: int, cache_path: Optional[str] = None) -> VonMangoldtTable:
    """キャッシュの上限が足りていれば読み込み、足りなければ作り直して保存する"""
    if cache_path and os.path.exists(cache_path):
        try:
            cached = load_sieve_cache(cache_path)
            if cached.limit >= limit:
                logger.debug(f"篩キャッシュを使用します: {cache_path} (limit={cached.limit})")
                return cached
            logger.info(f"篩キャッシュの上限 {cached.limit} が {limit} 未満のため再生成します")
        except ParseError as e:
            logger.warning(f"篩キャッシュを読めないため再生成します: {e}")

    table = sieve_von_mangoldt(limit)
    if cache_path:
        save_sieve_cache(table, cache_path)
    return table


# ---------------------------------------------------------------------------
# 零点表
# ---------------------------------------------------------------------------

def riemann_von_mangoldt(height: float) -> float:
    """0 < γ ≤ T の零点数の近似 (T/2π)log(T/2πe) + 7/8"""
    return height / (2.0 * math.pi) * math.log(height / (2.0 * math.pi * math.e)) + 0.875


@dataclass(frozen=True, eq=False)
class ZeroTable:
    ordinates: np.ndarray = field(repr=False)
    coverage_height: float
    source: str = "<memory>"

    def __post_init__(self):
        ordinates = np.asarray(self.ordinates, dtype=float)
        object.__setattr__(self, "ordinates", ordinates)
        if ordinates.size == 0:
            raise ParseError("零点がありません", None, self.source)
        if np.any(ordinates <= 0):
            raise MonotonicityError(f"{self.source}: 零点の縦座標は正である必要があります")
        if np.any(np.diff(ordinates) <= 0):
            index = int(np.argmax(np.diff(ordinates) <= 0))
            raise MonotonicityError(
                f"{self.source}: 零点が狭義単調増加ではありません "
                f"({ordinates[index]:.6f} → {ordinates[index + 1]:.6f})"
            )
        if abs(ordinates[0] - FIRST_ZERO) > 1e-3:
            raise MissingCoverage(f"{self.source}: 最初の零点が 14.1347 ではありません: {ordinates[0]}")
        if self.coverage_height < ordinates[-1]:
            raise MissingCoverage(
                f"{self.source}: coverage_height={self.coverage_height} が最大の零点 {ordinates[-1]} より小さいです"
            )
        self.check_count()

    def __len__(self) -> int:
        return int(self.ordinates.size)

    def count_up_to(self, height: float) -> int:
        return int(np.searchsorted(self.ordinates, height, side="right"))

    def truncated(self, height: float) -> "ZeroTable":
        """高さ height までに切り詰めた表"""
        keep = self.ordinates[self.ordinates <= height]
        return ZeroTable(keep, float(min(height, self.coverage_height)), f"{self.source}[:{height:g}]")

    def check_count(self) -> None:
        """零点数が Riemann–von Mangoldt の見積もりと 2 + 0.2 log T 以内で合うか確認する"""
        height = self.coverage_height
        if height < 2.0 * math.pi * math.e:
            return
        expected = riemann_von_mangoldt(height)
        allowance = 2.0 + 0.2 * math.log(height)
        if abs(len(self) - expected) > allowance:
            raise MissingCoverage(
                f"{self.source}: 高さ {height} までの零点数 {len(self)} が見積もり {expected:.2f} と合いません"
            )


def load_zero_table(path: str) -> ZeroTable:
    """'coverage_height=<T>' ヘッダ付きの零点ファイルを読み込む"""
    height = None
    ordinates = []
    with open(path, "r", encoding="utf-8") as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("coverage_height"):
                try:
                    height = float(line.split("=", 1)[1])
                except (IndexError, ValueError):
                    raise ParseError(f"coverage_height を読めません: {line}", line_number, path)
                continue
            try:
                ordinates.append(float(line))
            except ValueError:
                raise ParseError(f"縦座標を読めません: {line}", line_number, path)

    if height is None:
        raise MissingCoverage(f"{path}: coverage_height の宣言がありません")
    if not ordinates:
        raise ParseError("データ部が空です", None, path)

    table = ZeroTable(np.array(ordinates), height, path)
    logger.info(f"零点表を読み込みました: {path} ({len(table)} 個, 高さ {height})")
    return table


def write_zero_table(table: ZeroTable, path: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# nontrivial zeta zeros 1/2 + i*gamma, 0 < gamma <= {table.coverage_height:g}\n")
        f.write(f"coverage_height={table.coverage_height:.17g}\n")
        for gamma in table.ordinates:
            f.write(f"{gamma:.17g}\n")
    logger.info(f"零点表を書き出しました: {path} ({len(table)} 個)")


# ---------------------------------------------------------------------------
# ζ(s) の Euler–Maclaurin 評価
# ---------------------------------------------------------------------------

class ZetaValue(NamedTuple):
    sigma: float
    t: float
    value: complex
    err_est: float
    accuracy_loss: bool = False


def _euler_maclaurin(s: np.ndarray, cutoff: int) -> Tuple[np.ndarray, np.ndarray]:
    """カットオフ M での ζ(s) の近似値と、最初に省いた補正項の大きさ"""
    n = np.arange(1, cutoff, dtype=float)
    log_n = np.log(n)
    head = np.exp(-np.outer(s, log_n)).sum(axis=1)

    m = float(cutoff)
    m_pow = np.exp(-s * math.log(m))  # M^{-s}
    total = head + m_pow * m / (s - 1.0) + 0.5 * m_pow

    # T_k = B_{2k}/(2k)! · s(s+1)…(s+2k−2) · M^{−s−2k+1}
    rising = s.copy()
    power = m_pow / m
    omitted = np.zeros_like(s)
    for k, coeff in enumerate(_EM_COEFFS, start=1):
        term = coeff * rising * power
        if k <= EM_ORDER:
            total = total + term
        else:
            omitted = term
        rising = rising * (s + 2 * k - 1) * (s + 2 * k)
        power = power / (m * m)
    sigma = s.real
    err = np.abs(omitted) * np.abs(s + 2 * EM_ORDER + 1) / (sigma + 2 * EM_ORDER + 1)
    return total, err


def zeta_batch(sigma, t, terms: int = 10, rel_tol: float = 1e-12) -> Tuple[np.ndarray, np.ndarray]:
    """
    複数の点で ζ(σ+it) を評価する（σ > 0, |t| ≤ 1e5）

    カットオフは max(terms, 3 + |t|/2) から始め、誤差見積もりが rel_tol を超える点は倍にして再計算する。
    """
    sigma_arr = np.atleast_1d(np.asarray(sigma, dtype=float))
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    sigma_arr, t_arr = np.broadcast_arrays(sigma_arr, t_arr)
    s = (sigma_arr + 1j * t_arr).reshape(-1)

    if np.any(s.real <= 0):
        raise DomainError("σ > 0 の範囲のみ評価できます")
    if np.any(np.abs(s.imag) > ZETA_MAX_HEIGHT):
        raise DomainError(f"|t| ≤ {ZETA_MAX_HEIGHT:g} の範囲のみ評価できます")
    if np.any((s.real == 1.0) & (s.imag == 0.0)):
        raise DomainError("s = 1 は ζ の極です")

    values = np.empty(s.shape, dtype=complex)
    errors = np.empty(s.shape, dtype=float)
    order = np.argsort(np.abs(s.imag), kind="stable")
    base = np.maximum(terms, np.ceil(3.0 + np.abs(s.imag) / 2.0)).astype(int)

    start = 0
    while start < order.size:
        # 行列 (点数 × M) が大きくなりすぎないよう、高さの近い点をまとめる
        cutoff = int(base[order[start]])
        width = max(1, ZETA_BATCH_CELLS // cutoff)
        chunk = order[start:start + width]
        cutoff = int(base[chunk].max())
        m = cutoff
        while chunk.size:
            value, err = _euler_maclaurin(s[chunk], m)
            done = (err <= rel_tol * np.abs(value)) | (m >= 8 * cutoff)
            values[chunk[done]] = value[done]
            errors[chunk[done]] = err[done]
            chunk = chunk[~done]
            m *= 2
        start += width

    shape = sigma_arr.shape
    return values.reshape(shape), errors.reshape(shape)


def zeta_euler_maclaurin(sigma: float, t: float, terms: int = 10, *, strict: bool = False) -> ZetaValue:
    """ζ(σ+it) を Euler–Maclaurin 和 (B_12 まで) で評価する"""
    if terms < 10:
        raise DomainError(f"terms は 10 以上です: {terms}")
    values, errors = zeta_batch(sigma, t, terms)
    value, err = complex(values.reshape(-1)[0]), float(errors.reshape(-1)[0])
    loss = err > 1e-6 * abs(value)
    if loss:
        logger.warning(f"ζ({sigma}+{t}i) の誤差見積もり {err:.3g} が大きすぎます")
        if strict:
            raise AccuracyLossError(f"ζ({sigma}+{t}i) の精度が不足しています", {"err_est": err})
    return ZetaValue(float(sigma), float(t), value, err, loss)


def log_abs_zeta(sigma: float, t: float) -> Tuple[float, float]:
    """log|ζ(σ+it)| とその誤差見積もり"""
    z = zeta_euler_maclaurin(sigma, t)
    magnitude = abs(z.value)
    if magnitude < 1e-8:
        raise NearZeroSingularity(
            f"|ζ({sigma}+{t}i)| = {magnitude:.3g} が小さすぎます", {"sigma": sigma, "t": t}
        )
    return math.log(magnitude), z.err_est / magnitude


def completed_zeta(sigma: float, t: float) -> complex:
    """ξ(s) = s(1−s)π^{−s/2}Γ(s/2)ζ(s)"""
    s = complex(sigma, t)
    z = zeta_euler_maclaurin(sigma, t).value
    log_factor = np.log(s * (1.0 - s)) - 0.5 * s * math.log(math.pi) + loggamma(0.5 * s)
    return complex(np.exp(log_factor) * z)


# ---------------------------------------------------------------------------
# Hardy の Z 関数と零点生成
# ---------------------------------------------------------------------------

def riemann_siegel_theta(t):
    ts = np.asarray(t, dtype=float)
    values = np.imag(loggamma(0.25 + 0.5j * ts)) - 0.5 * ts * math.log(math.pi)
    return values if np.ndim(t) else float(values)


def hardy_z(t):
    """Z(t) = e^{iθ(t)} ζ(1/2 + it)（実数値）"""
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    values, _ = zeta_batch(0.5, ts)
    z = (np.exp(1j * riemann_siegel_theta(ts)) * values).real
    return z if np.ndim(t) else float(z[0])


def _mean_spacing(t: float) -> float:
    return 2.0 * math.pi / math.log(max(t, 2.0 * math.pi * math.e) / (2.0 * math.pi))


def _sign_change_roots(grid: np.ndarray, values: np.ndarray) -> List[float]:
    roots = []
    signs = np.sign(values)
    for i in np.nonzero(signs[:-1] * signs[1:] < 0)[0]:
        roots.append(brentq(hardy_z, grid[i], grid[i + 1], xtol=1e-13, rtol=1e-15))
    return roots


def generate_zero_table(height: float, start: float = 10.0) -> ZeroTable:
    """
    0 < γ ≤ height の零点を Z(t) の符号変化から求める

    平均間隔の 1/16 の格子で符号変化を拾い Brent 法で精密化する。
    符号が変わらない |Z| の小さな極小の周りは 1/8 の細かさで再走査する。
    """
    if not height > 20:
        raise DomainError(f"height は 20 より大きい必要があります: {height}")

    points = [start]
    while points[-1] < height:
        points.append(points[-1] + _mean_spacing(points[-1]) / 16.0)
    grid = np.array(points)
    grid[-1] = height
    values = hardy_z(grid)
    roots = _sign_change_roots(grid, values)

    magnitude = np.abs(values)
    minima = np.nonzero((magnitude[1:-1] < magnitude[:-2]) & (magnitude[1:-1] < magnitude[2:]))[0] + 1
    rescanned = 0
    for i in minima:
        if np.sign(values[i - 1]) != np.sign(values[i + 1]):
            continue
        local_scale = np.max(magnitude[max(0, i - 8): i + 9])
        if magnitude[i] > 0.25 * local_scale:
            continue
        fine = np.linspace(grid[i - 1], grid[i + 1], 17)
        extra = _sign_change_roots(fine, hardy_z(fine))
        if extra:
            roots.extend(extra)
            rescanned += len(extra)

    ordinates = np.unique(np.round(np.array(sorted(roots)), 12))
    ordinates = ordinates[ordinates <= height]
    logger.info(f"零点を {ordinates.size} 個生成しました (高さ {height}, 再走査で追加 {rescanned} 個)")
    return ZeroTable(ordinates, float(height), f"generated:{height:g}")


def _generated_files(cache_dir: str) -> List[Tuple[int, str]]:
    found = []
    for name in os.listdir(cache_dir):
        stem = name[len(GENERATED_PREFIX):-len(".txt")]
        if name.startswith(GENERATED_PREFIX) and name.endswith(".txt") and stem.isdigit():
            found.append((int(stem), name))
    return found


def load_or_generate_zeros(height: float, path: Optional[str] = None, cache_dir: Optional[str] = None) -> ZeroTable:
    """
    高さ height までを覆う零点表を用意する

    path の表が足りていればそれを使い、足りなければ cache_dir の生成済みファイルを探し、
    それもなければ生成して cache_dir に書き出す。
    """
    if path and os.path.exists(path):
        table = load_zero_table(path)
        if table.coverage_height >= height:
            return table
        logger.info(f"{path} の高さ {table.coverage_height:g} が {height:g} に足りないため生成した表を使います")

    target = float(math.ceil(max(height, 30.0)))
    if cache_dir and os.path.isdir(cache_dir):
        for cached_height, name in sorted(_generated_files(cache_dir)):
            if cached_height >= target:
                return load_zero_table(os.path.join(cache_dir, name))

    table = generate_zero_table(target)
    if cache_dir:
        write_zero_table(table, os.path.join(cache_dir, f"{GENERATED_PREFIX}{int(target)}.txt"))
    return table
