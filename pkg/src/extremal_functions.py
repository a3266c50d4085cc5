# src/extremal_functions.py
"""
f_α の指数型 2πΔ の極値ミノラント g_Δ / マジョラント m_Δ

g_Δ(z) = G_Δ(Δz), m_Δ(z) = M_Δ(Δz) を sinc² 補間級数で直接評価し、
フーリエ変換（k 級数・閉形式・数値積分・周回積分の 4 経路）と L¹ 距離を与える。
"""
import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import NamedTuple, Optional, Union

import numpy as np
from scipy import integrate
from scipy.special import sici

from src.config import QuadratureSpec, validate_alpha
from src.core_analysis import (
    adaptive_quad,
    adaptive_quad_vec,
    f_alpha,
    f_alpha_deriv,
    f_alpha_hat,
    fsum_complex,
    scalar_or_array,
)
from src.errors import DomainError, InvalidParams, SlowConvergenceError

logger = logging.getLogger("extremal_zeta.extremal_functions")

# 一度に評価する点の数（点 × 節点の行列サイズを抑える）
EVAL_CHUNK = 512
# 節点からこの距離以内では sinc² をテイラー展開で評価する
NODE_EPS = 1e-7
# k 級数の打ち切り目標
SERIES_TOL = 1e-16
# ft_numeric / l1_numeric が使う節点の余裕
NUMERIC_NODE_COUNT = 2000


class Kind(str, Enum):
    MINORANT = "minorant"
    MAJORANT = "majorant"


@dataclass(frozen=True)
class ExtremalParams:
    alpha: float
    delta: float
    kind: Kind = Kind.MINORANT
    a: float = field(init=False)
    b: float = field(init=False)

    def __post_init__(self):
        validate_alpha(self.alpha)
        if not (isinstance(self.delta, (int, float)) and math.isfinite(self.delta) and self.delta > 0):
            raise InvalidParams(f"delta は正の有限値である必要があります: {self.delta}")
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "a", (self.alpha - 0.5) * self.delta)
        object.__setattr__(self, "b", 2.0 * self.delta)

    @property
    def shift(self) -> float:
        return self.alpha - 0.5

    @property
    def ratio(self) -> float:
        """k 級数の公比 e^{−(2α−1)πΔ}"""
        return math.exp(-2.0 * math.pi * self.a)

    @property
    def is_minorant(self) -> bool:
        return self.kind is Kind.MINORANT

    def with_kind(self, kind: Union[Kind, str]) -> "ExtremalParams":
        return ExtremalParams(self.alpha, self.delta, Kind(kind))

    def label(self) -> str:
        return f"{self.kind.value}(alpha={self.alpha:g}, delta={self.delta:g})"


@dataclass(frozen=True)
class SeriesTruncation:
    node_count: int = 40
    k_terms: int = 1_000_000
    tail_bound: float = 0.0

    def __post_init__(self):
        if self.node_count < 1 or self.k_terms < 1:
            raise InvalidParams(f"node_count と k_terms は 1 以上です: {self.node_count}, {self.k_terms}")
        if not (self.tail_bound >= 0 and math.isfinite(self.tail_bound)):
            raise InvalidParams(f"tail_bound は非負の有限値です: {self.tail_bound}")


class ExtremalValue(NamedTuple):
    value: Union[float, complex, np.ndarray]
    tail_bound: Union[float, np.ndarray]


class FourierValue(NamedTuple):
    value: float
    tail_bound: float
    k_terms: int = 0
    slow_convergence: bool = False


class NumericValue(NamedTuple):
    value: Union[float, np.ndarray]
    err_est: Union[float, np.ndarray]


# ---------------------------------------------------------------------------
# 補間級数
# ---------------------------------------------------------------------------

def _node_positions(kind: Kind, n_max: int) -> np.ndarray:
    """w 座標での節点（マジョラントは整数、ミノラントは半整数）"""
    if kind is Kind.MAJORANT:
        return np.arange(-n_max, n_max + 1, dtype=float)
    return np.arange(-n_max, n_max, dtype=float) + 0.5


def _sinc_squared(u: np.ndarray) -> np.ndarray:
    values = np.sinc(u) ** 2
    near = np.abs(u) < NODE_EPS
    if near.any():
        values = np.where(near, 1.0 - (np.pi * u) ** 2 / 3.0, values)
    return values


def _interpolation_tail(delta: float, w: np.ndarray, next_node: float) -> np.ndarray:
    """
    省いた節点 |p| ≥ next_node の寄与の上界

    F(p) ≤ 4Δ²/p², |F'(p)| ≤ 8Δ²/|p|³, |sinc²(u)| ≤ cosh²(π Im u)/(π²|u|²) を
    両側で積分比較したもの。
    """
    gap = next_node - np.abs(w.real)
    base = next_node - 1.0
    growth = np.cosh(np.pi * w.imag) ** 2 if np.iscomplexobj(w) else 1.0
    return (2.0 * delta ** 2 / np.pi ** 2) * growth * (4.0 / (gap ** 2 * base) + 4.0 / (gap * base ** 2))


def eval_extremal(params: ExtremalParams, z, trunc: Optional[SeriesTruncation] = None) -> ExtremalValue:
    """
    g_Δ(z) または m_Δ(z) を補間級数で評価する

    節点は |Re Δz| + node_count まで両側にとり、tail_bound は点ごとの打ち切り誤差の上界。
    """
    trunc = trunc or SeriesTruncation()
    z_arr = np.asarray(z)
    w = params.delta * z_arr.reshape(-1)
    is_complex = np.iscomplexobj(w)
    values = np.empty(w.shape, dtype=complex if is_complex else float)
    tails = np.empty(w.shape, dtype=float)

    for start in range(0, w.size, EVAL_CHUNK):
        block = w[start:start + EVAL_CHUNK]
        n_max = int(math.ceil(float(np.max(np.abs(block.real))))) + trunc.node_count
        nodes = _node_positions(params.kind, n_max)
        x_nodes = nodes / params.delta
        f_nodes = f_alpha(x_nodes, params.alpha)
        df_nodes = f_alpha_deriv(x_nodes, params.alpha) / params.delta

        u = block[:, None] - nodes[None, :]
        terms = _sinc_squared(u) * (f_nodes[None, :] + u * df_nodes[None, :])
        values[start:start + block.size] = terms.sum(axis=1)
        tails[start:start + block.size] = _interpolation_tail(params.delta, block, nodes[-1] + 1.0)

    logger.debug(f"{params.label()} を {w.size} 点で評価しました (node_count={trunc.node_count})")
    return ExtremalValue(
        scalar_or_array(values.reshape(z_arr.shape), z),
        scalar_or_array(tails.reshape(z_arr.shape), z),
    )


# ---------------------------------------------------------------------------
# フーリエ変換と L¹ 距離（閉形式）
# ---------------------------------------------------------------------------

def _series_length(params: ExtremalParams, trunc: SeriesTruncation):
    """項の上界 (3/Δ)q^k から、幾何尾部が SERIES_TOL を下回る項数を決める"""
    log_q = -2.0 * math.pi * params.a
    one_minus_q = -math.expm1(log_q)
    target = SERIES_TOL * params.delta * one_minus_q / 3.0
    needed = max(2, int(math.ceil(math.log(target) / log_q))) if target < 1.0 else 2
    k_terms = min(needed, trunc.k_terms)
    tail = 3.0 / params.delta * math.exp(k_terms * log_q) / one_minus_q
    return k_terms, tail, needed > trunc.k_terms


def ft_series(
    params: ExtremalParams,
    xi: float,
    trunc: Optional[SeriesTruncation] = None,
    *,
    strict: bool = False,
) -> FourierValue:
    """ĝ_Δ(ξ)（交代級数）または m̂_Δ(ξ)（正項級数）。|ξ| > Δ では 0。"""
    y = abs(float(xi))
    if y > params.delta:
        return FourierValue(0.0, 0.0, 0, False)

    trunc = trunc or SeriesTruncation()
    k_terms, tail, slow = _series_length(params, trunc)
    if slow:
        logger.warning(
            f"{params.label()}: k 級数の収束が遅く {k_terms} 項で打ち切りました (尾部 {tail:.3g})"
        )
        if strict:
            raise SlowConvergenceError(f"k 級数が {k_terms} 項で収束しません", {"tail_bound": tail})

    k = np.arange(k_terms, dtype=float)
    near = f_alpha_hat(y + k * params.delta, params.alpha)
    far = f_alpha_hat((k + 2.0) * params.delta - y, params.alpha)
    terms = (k + 1.0) * (near - far)
    if params.is_minorant:
        terms[1::2] *= -1.0

    return FourierValue(math.fsum(terms), tail, k_terms, slow)


def l1_distance(params: ExtremalParams) -> float:
    """∫|f_α − F| の閉形式"""
    q = params.ratio
    e4 = math.exp(-4.0 * math.pi * params.delta)
    if params.is_minorant:
        return 2.0 / params.delta * (math.log1p(q) - math.log1p(e4))
    return 2.0 / params.delta * (math.log1p(-e4) - math.log1p(-q))


def ft_at_zero(params: ExtremalParams) -> float:
    """F̂(0) = 2π(5/2 − α) ∓ L¹ 距離"""
    total = 2.0 * math.pi * (2.5 - params.alpha)
    distance = l1_distance(params)
    return total - distance if params.is_minorant else total + distance


@lru_cache(maxsize=64)
def envelope_constant(params: ExtremalParams, node_count: int = 200) -> float:
    """|x| ≥ 10 で |F(x)| ≤ C/x² となる経験的定数 C（下限 4、1 割の余裕込み）"""
    xs = np.linspace(10.0, 400.0, 3901)
    values, tails = eval_extremal(params, xs, SeriesTruncation(node_count=node_count))
    fitted = float(np.max((np.abs(values) + tails) * xs ** 2))
    constant = max(4.0, 1.1 * fitted)
    logger.debug(f"{params.label()}: 包絡定数 C={constant:.6g} (当てはめ値 {fitted:.6g})")
    return constant


# ---------------------------------------------------------------------------
# 数値積分によるフーリエ変換と L¹ 距離
# ---------------------------------------------------------------------------

class FarField(NamedTuple):
    mean: float
    amplitude: float
    drift: float


def far_field_profile(params: ExtremalParams, x_end: float, trunc: SeriesTruncation, samples: int = 64) -> FarField:
    """(F − f_α)(x)·x² の最後の 2 セルでの平均と振幅"""
    cell = 1.0 / params.delta
    offsets = (np.arange(samples) + 0.5) / samples * cell
    xs = np.concatenate([x_end - cell + offsets, x_end - 2.0 * cell + offsets])
    values = eval_extremal(params, xs, trunc).value
    scaled = (values - f_alpha(xs, params.alpha)) * xs ** 2
    last, previous = scaled[:samples], scaled[samples:]
    mean = float(np.mean(last))
    return FarField(mean, float(np.max(np.abs(last - mean))), abs(mean - float(np.mean(previous))))


def _cosine_tail(omega: float, x_end: float) -> float:
    """∫_X^∞ cos(ωx)/x² dx"""
    if omega == 0.0:
        return 1.0 / x_end
    si, _ = sici(omega * x_end)
    return math.cos(omega * x_end) / x_end - omega * (math.pi / 2.0 - si)


def _oscillation_bound(nu: float, x_end: float) -> float:
    """|∫_X^∞ cos(2πνx)/x² dx| の上界"""
    if nu == 0.0:
        return 1.0 / x_end
    return min(1.0 / x_end, 1.0 / (math.pi * nu * x_end ** 2))


def _folded_cosine_integrals(params, xis, spec, trunc, strict):
    """
    ∫_0^X F(x) cos(2πξx) dx を幅 1/Δ のセルに折り畳んで一度に積分する

    戻り値: (各 ξ の積分値, 求積誤差, 補間打ち切り誤差の積分, X)
    """
    cell = 1.0 / params.delta
    n_cells = max(1, int(math.ceil(spec.truncation_radius * params.delta)))
    x_end = n_cells * cell
    starts = np.arange(n_cells) * cell
    omegas = 2.0 * np.pi * xis

    def integrand(s):
        xs = starts + s
        values, tails = eval_extremal(params, xs, trunc)
        phases = np.cos(np.outer(omegas, xs))
        return np.concatenate([phases @ values, [tails.sum()]])

    result = adaptive_quad_vec(integrand, 0.0, cell, spec, strict=strict)
    return result.value[:-1], result.err_est, result.value[-1], x_end


def ft_numeric(
    params: ExtremalParams,
    xi,
    spec: Optional[QuadratureSpec] = None,
    trunc: Optional[SeriesTruncation] = None,
    *,
    strict: bool = False,
) -> NumericValue:
    """
    ∫ F(x) e^{−2πixξ} dx を求積で求める（k 級数とは独立の経路）

    [0, X] は折り畳み求積、f_α の尾部 [X, ∞) は QUADPACK のフーリエ積分、
    (F − f_α) の尾部は遠方モデル c/x² で補正し、モデルの残差を誤差に含める。
    """
    spec = spec or QuadratureSpec()
    trunc = trunc or SeriesTruncation(node_count=NUMERIC_NODE_COUNT)
    xis = np.abs(np.atleast_1d(np.asarray(xi, dtype=float)))

    core, quad_err, trunc_err, x_end = _folded_cosine_integrals(params, xis, spec, trunc, strict)
    far = far_field_profile(params, x_end, trunc)

    values = np.empty_like(xis)
    errors = np.empty_like(xis)
    for i, y in enumerate(xis):
        omega = 2.0 * math.pi * y
        if omega == 0.0:
            f_tail, f_err = integrate.quad(lambda x: f_alpha(x, params.alpha), x_end, np.inf)
        else:
            f_tail, f_err = integrate.quad(
                lambda x: f_alpha(x, params.alpha), x_end, np.inf, weight="cos", wvar=omega, limlst=100
            )[:2]
        model = far.mean * _cosine_tail(omega, x_end)
        model_err = (
            0.5 * far.amplitude * (_oscillation_bound(y + params.delta, x_end)
                                   + _oscillation_bound(abs(y - params.delta), x_end))
            + far.drift * params.delta
        )
        values[i] = 2.0 * (core[i] + f_tail + model)
        errors[i] = 2.0 * (quad_err + trunc_err + f_err + model_err)

    logger.debug(f"{params.label()}: ft_numeric を {xis.size} 個の周波数で評価しました (X={x_end:g})")
    return NumericValue(scalar_or_array(values, xi), scalar_or_array(errors, xi))


def l1_numeric(
    params: ExtremalParams,
    spec: Optional[QuadratureSpec] = None,
    trunc: Optional[SeriesTruncation] = None,
    *,
    strict: bool = False,
) -> NumericValue:
    """∫|f_α − F| を求積で求める（閉形式 l1_distance の検算用）"""
    spec = spec or QuadratureSpec()
    trunc = trunc or SeriesTruncation(node_count=NUMERIC_NODE_COUNT)

    core, quad_err, trunc_err, x_end = _folded_cosine_integrals(params, np.zeros(1), spec, trunc, strict)
    target = adaptive_quad(
        lambda x: f_alpha(x, params.alpha), 0.0, x_end, spec, points=(params.shift, 2.0), strict=strict
    )
    far = far_field_profile(params, x_end, trunc)

    gap = core[0] - target.value + far.mean / x_end
    err = quad_err + trunc_err + target.err_est + far.amplitude / x_end + far.drift * params.delta
    value = -2.0 * gap if params.is_minorant else 2.0 * gap
    return NumericValue(value, 2.0 * err)


# ---------------------------------------------------------------------------
# 周回積分による検算
# ---------------------------------------------------------------------------

def _check_strip(a: float, b: float):
    if not (a > 0 and b > 0):
        raise DomainError(f"a, b は正である必要があります: a={a}, b={b}")


def _exp_gap(w_abs: np.ndarray, a: float, b: float) -> np.ndarray:
    """e^{−2π|w|a} − e^{−2π|w|b}"""
    return np.expm1(-2.0 * np.pi * w_abs * a) - np.expm1(-2.0 * np.pi * w_abs * b)


def contour_k(w, a: float, b: float):
    """x ↦ log(((x+1/2)²+b²)/((x+1/2)²+a²)) の変換 ∫ · e^{2πiwx} dx"""
    _check_strip(a, b)
    ws = np.asarray(w, dtype=float)
    w_abs = np.abs(ws)
    safe = np.where(w_abs > 0, w_abs, 1.0)
    values = np.exp(-1j * np.pi * ws) * _exp_gap(w_abs, a, b) / safe
    values = np.where(w_abs > 0, values, 2.0 * np.pi * (b - a) + 0j)
    return scalar_or_array(values, w)


def contour_h(w, a: float, b: float):
    """x ↦ (x+1/2)/((x+1/2)²+a²) − (x+1/2)/((x+1/2)²+b²) の変換（w ≠ 0）"""
    _check_strip(a, b)
    ws = np.asarray(w, dtype=float)
    if np.any(ws == 0):
        raise DomainError("contour_h は w = 0 で定義されません")
    values = np.sign(ws) * np.pi * 1j * np.exp(-1j * np.pi * ws) * _exp_gap(np.abs(ws), a, b)
    return scalar_or_array(values, w)


def _contour_terms(a: float) -> int:
    q = math.exp(-2.0 * math.pi * a)
    target = SERIES_TOL * (1.0 - q) / 4.0
    return max(2, min(1_000_000, int(math.ceil(math.log(target) / math.log(q)))))


def ft_contour(params: ExtremalParams, xi: float) -> FourierValue:
    """
    ポアソン和と周回積分の経路で F̂(ξ) を組み立てる

    y = |ξ|/Δ として (1−y)Σκ(y+n) − (i/π)Σ η(y+n) を Δ で割る。
    ミノラントは共通因子 e^{πiy}、マジョラントは各項に e^{πi(y+n)} が付く。
    """
    y = abs(float(xi)) / params.delta
    if y >= 1.0:
        return FourierValue(0.0, 0.0, 0, False)

    terms = _contour_terms(params.a)
    w = y + np.arange(-terms, terms + 1, dtype=float)
    k_vals = np.asarray(contour_k(w, params.a, params.b))
    h_vals = np.asarray(contour_h(w, params.a, params.b)) if y > 0 else np.zeros_like(k_vals)
    if params.is_minorant:
        phase = np.exp(1j * np.pi * y)
        first = phase * fsum_complex(k_vals)
        second = phase * fsum_complex(h_vals)
    else:
        phases = np.exp(1j * np.pi * w)
        first = fsum_complex(phases * k_vals)
        second = fsum_complex(phases * h_vals)

    total = ((1.0 - y) * first - 1j / math.pi * second) / params.delta
    q = math.exp(-2.0 * math.pi * params.a)
    tail = 2.0 * q ** terms / (1.0 - q) * (1.0 / terms + 1.0) / params.delta
    if abs(total.imag) > 1e-9:
        logger.warning(f"{params.label()}: 周回積分経路の虚部が残っています ({total.imag:.3g})")
    return FourierValue(total.real, tail, terms, False)


def _lattice_kernel(n: np.ndarray, a: float, b: float, kind: Kind) -> np.ndarray:
    centre = n + 0.5 if kind is Kind.MINORANT else n
    sq = centre ** 2
    return np.log1p((b * b - a * a) / (sq + a * a))


def lattice_first_sum(y: float, a: float, b: float, kind: Union[Kind, str], terms: int = 20000) -> ExtremalValue:
    """
    (1−|y|)·Σ_{|n|≤terms} k̂(n)e^{2πiyn}（格子点側の第一和）

    ポアソン和により contour_k の和 Σκ(y+n) と一致する。
    尾部はアーベルの総和法で k̂(terms+1)/|sin πy|（y = 0 では (b²−a²)/terms）で抑える。
    """
    _check_strip(a, b)
    kind = Kind(kind)
    n = np.arange(-terms, terms + 1, dtype=float)
    series = fsum_complex(_lattice_kernel(n, a, b, kind) * np.exp(2j * np.pi * y * n))
    weight = 1.0 - abs(y)
    value = weight * series * (np.exp(1j * np.pi * y) if kind is Kind.MINORANT else 1.0)

    edge = float(_lattice_kernel(np.array([terms + 0.5]), a, b, Kind.MAJORANT)[0])
    sin_y = abs(math.sin(math.pi * y))
    if sin_y > 1e-3:
        tail = 2.0 * edge / sin_y
    else:
        tail = 2.0 * (b * b - a * a) / terms
    return ExtremalValue(complex(value), weight * tail)
