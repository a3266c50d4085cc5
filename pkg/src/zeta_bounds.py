# src/zeta_bounds.py
"""
RH を仮定した log|ζ(α+it)| の上界・下界の評価パイプライン

- Hadamard 積と Stirling 公式による恒等式の数値検証と、g_Δ / m_Δ による挟み込み
- 素数冪和の上界と、その導出に使う 2 つの不等式・付録の漸近式
- α と t から場合分けされた主要項（上界・下界）と Littlewood 型の定数
"""
import math
import asyncio
import logging
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, List, NamedTuple, Optional

import numpy as np
from scipy.special import exp1, expi, loggamma

from src.arithmetic_data import VonMangoldtTable, ZeroTable, log_abs_zeta, zeta_euler_maclaurin
from src.config import QuadratureSpec, validate_alpha
from src.core_analysis import adaptive_quad, f_alpha
from src.errors import DomainError, ExtremalZetaError, InsufficientCoverage
from src.explicit_formula import zero_tail_bound
from src.extremal_functions import (
    ExtremalParams,
    Kind,
    SeriesTruncation,
    envelope_constant,
    eval_extremal,
    l1_distance,
)

logger = logging.getLogger("extremal_zeta.zeta_bounds")

EULER_GAMMA = float(np.euler_gamma)
# Stirling 近似の O(1/t) を置き換える定数
STIRLING_CONSTANT = 10.0
# 主要項の評価に ζ を併記する上限の高さ
ACTUAL_MAX_HEIGHT = 1e5
MIN_IDENTITY_HEIGHT = 50.0
MIN_THEOREM_HEIGHT = math.exp(math.e)
# 付録 A1 の NearOne 枝のしきい値
APPENDIX_NEAR_ONE = 2.0
# 境界の ±この幅にある α はレポートで印を付ける
SEAM_WIDTH = 0.05
LEMMA_SLACK = 1e-12


class Regime(str, Enum):
    NEAR_HALF = "NearHalf"
    NEAR_ONE = "NearOne"
    MIDDLE = "Middle"


@dataclass
class BoundReport:
    alpha: float
    t: float
    side: str  # "upper" または "lower"
    delta_used: float
    regime: Regime
    main_term: float
    secondary_terms: float
    bound_value: float
    error_scale: float
    actual: Optional[float] = None
    actual_err: Optional[float] = None
    slack: Optional[float] = None
    flags: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        report = asdict(self)
        report["regime"] = self.regime.value
        return report


class HadamardCheck(NamedTuple):
    lhs: float
    rhs: float
    residual: float
    budget: float
    exact_rhs: float = 0.0
    exact_residual: float = 0.0
    zero_tail: float = 0.0


class SandwichCheck(NamedTuple):
    bound: float
    actual: float
    holds: bool
    budget: float
    kind: str = Kind.MINORANT.value


class AppendixValue(NamedTuple):
    numeric: float
    asymptotic: float
    reference: float
    err_est: float
    branch: str = ""


class LittlewoodReport(NamedTuple):
    t: float
    upper: float
    lower_reciprocal: float
    actual_abs: Optional[float] = None
    actual_reciprocal: Optional[float] = None
    upper_slack: Optional[float] = None
    lower_slack: Optional[float] = None


class ComparisonValue(NamedTuple):
    value: float
    reference: float
    difference: float


class SeamGap(NamedTuple):
    seam: str
    alpha_below: float
    alpha_above: float
    bound_below: float
    bound_above: float
    gap: float


# ---------------------------------------------------------------------------
# 恒等式と挟み込み
# ---------------------------------------------------------------------------

def _identity_prefactor(alpha: float) -> float:
    return 1.25 - 0.5 * alpha


def _check_identity_inputs(t: float, zeros: ZeroTable):
    if not (math.isfinite(t) and t >= MIN_IDENTITY_HEIGHT):
        raise DomainError(f"t は {MIN_IDENTITY_HEIGHT:g} 以上である必要があります: {t}")
    if zeros.coverage_height < 2.0 * t:
        raise InsufficientCoverage(
            f"零点表の高さ {zeros.coverage_height:g} が 2t = {2.0 * t:g} に足りません",
            {"coverage_height": zeros.coverage_height, "t": t},
        )


def _paired_points(t: float, zeros: ZeroTable) -> np.ndarray:
    return np.sort(np.concatenate([t - zeros.ordinates, t + zeros.ordinates]))


def hadamard_identity(alpha: float, t: float, zeros: ZeroTable) -> HadamardCheck:
    """
    log|ζ(α+it)| = (5/4 − α/2)log(t/2) − (1/2)Σ_γ f_α(t−γ) + log|ζ(5/2+it)| − (5/4 − α/2)log π + O(1/t)

    rhs は Stirling 近似の形、exact_rhs は s(1−s) と Γ 因子を厳密に残した形で、
    後者の残差は零点の打ち切り分だけになる。
    """
    validate_alpha(alpha)
    _check_identity_inputs(t, zeros)
    lhs, lhs_err = log_abs_zeta(alpha, t)
    anchor, anchor_err = log_abs_zeta(2.5, t)

    zero_sum = math.fsum(f_alpha(_paired_points(t, zeros), alpha))
    tail = 0.5 * zero_tail_bound(t, zeros.coverage_height, 4.0)
    c = _identity_prefactor(alpha)
    rhs = c * math.log(t / 2.0) - 0.5 * zero_sum + anchor - c * math.log(math.pi)

    s1, s2 = complex(alpha, t), complex(2.5, t)
    factor = math.log(abs(s1 * (1.0 - s1) / (s2 * (1.0 - s2))))
    gamma_gap = float(np.real(loggamma(0.5 * s1) - loggamma(0.5 * s2)))
    exact_rhs = anchor - 0.5 * zero_sum - factor - c * math.log(math.pi) - gamma_gap

    budget = tail + STIRLING_CONSTANT / t + lhs_err + anchor_err
    residual = lhs - rhs
    logger.debug(
        f"恒等式 α={alpha} t={t}: 残差 {residual:.3g} (厳密形 {lhs - exact_rhs:.3g}, 予算 {budget:.3g})"
    )
    return HadamardCheck(lhs, rhs, residual, budget, exact_rhs, lhs - exact_rhs, tail)


def sandwich_check(
    params: ExtremalParams,
    t: float,
    zeros: ZeroTable,
    trunc: Optional[SeriesTruncation] = None,
) -> SandwichCheck:
    """
    恒等式の f_α を F に置き換えた右辺

    ミノラント g_Δ では log|ζ(α+it)| の上界、マジョラント m_Δ では下界になる。
    """
    _check_identity_inputs(t, zeros)
    actual, actual_err = log_abs_zeta(params.alpha, t)
    anchor, anchor_err = log_abs_zeta(2.5, t)

    values, tails = eval_extremal(params, _paired_points(t, zeros), trunc)
    c = _identity_prefactor(params.alpha)
    bound = c * math.log(t / 2.0) - 0.5 * math.fsum(values) + anchor - c * math.log(math.pi)
    budget = (
        0.5 * zero_tail_bound(t, zeros.coverage_height, envelope_constant(params))
        + 0.5 * math.fsum(tails)
        + STIRLING_CONSTANT / t
        + actual_err
        + anchor_err
    )

    holds = actual <= bound + budget if params.is_minorant else actual >= bound - budget
    if not holds:
        logger.warning(
            f"{params.label()} t={t}: 挟み込みが成り立ちません (界 {bound:.6g}, 実際 {actual:.6g}, 予算 {budget:.3g})"
        )
    return SandwichCheck(bound, actual, holds, budget, params.kind.value)


# ---------------------------------------------------------------------------
# 素数冪和の上界と補題
# ---------------------------------------------------------------------------

def _prime_sum_main(log_x: float, alpha: float) -> float:
    if (1.0 - alpha) * log_x <= 1.0:
        return math.log(log_x)
    shift = alpha - 0.5
    coeff = (2.0 * alpha - 1.0) / (alpha * (1.0 - alpha))
    damping = 1.0 / (1.0 + math.exp(-shift * log_x))
    return coeff * math.exp((1.0 - alpha) * log_x) / log_x * damping + math.log(log_x)


def prime_sum_bound(x: float, alpha: float) -> float:
    """
    素数冪にわたる k 級数の和の上界（主要項のみ）

    (1−α)log x ≤ 1 なら log log x、それ以外は
    (2α−1)/(α(1−α))·x^{1−α}/log x·x^{α−1/2}/(x^{α−1/2}+1) + log log x。
    """
    validate_alpha(alpha)
    if not x >= 10:
        raise DomainError(f"x は 10 以上である必要があります: {x}")
    return _prime_sum_main(math.log(x), alpha)


def _decay_weight(log_y: float, shift: float) -> float:
    """y^{−(α−1/2)}/log y を対数で評価する"""
    return math.exp(-shift * log_y) / log_y


def _check_lemma_inputs(k: int, n: float, x: float, k_min: int):
    if k < k_min:
        raise DomainError(f"k は {k_min} 以上である必要があります: {k}")
    if not 2 <= n <= x:
        raise DomainError(f"2 ≤ n ≤ x が必要です: n={n}, x={x}")


def lemma_initial_ineq(k: int, n: float, x: float, alpha: float) -> bool:
    """隣り合う k の差分が k とともに減ることを浮動小数点で確認する（10⁻¹² の余裕付き）"""
    validate_alpha(alpha)
    _check_lemma_inputs(k, n, x, 0)
    shift = alpha - 0.5
    log_n, log_x = math.log(n), math.log(x)

    def bracket(j: int) -> float:
        return _decay_weight(log_n + j * log_x, shift) - _decay_weight((j + 2) * log_x - log_n, shift)

    lhs = (k + 1) * bracket(k)
    rhs = (k + 2) * bracket(k + 1)
    return lhs + LEMMA_SLACK * max(1.0, abs(lhs), abs(rhs)) >= rhs


def lemma_bound_sum_k(k: int, n: float, x: float, alpha: float) -> bool:
    """k ≥ 1 の各項を 1/log x − 1/(x^{α−1/2}log x) で上下から挟む 2 つの不等式"""
    validate_alpha(alpha)
    _check_lemma_inputs(k, n, x, 1)
    log_n, log_x = math.log(n), math.log(x)
    scale = math.exp((alpha - 0.5) * log_x)
    pivot = 1.0 / log_x - 1.0 / (scale * log_x)
    first = (k + 1) / (k * log_x + log_n) - (k + 2) / (scale * ((k + 1) * log_x + log_n))
    second = (k + 1) / ((k + 2) * log_x - log_n) - (k + 2) / (scale * ((k + 3) * log_x - log_n))
    slack = LEMMA_SLACK * max(1.0, abs(pivot), abs(first), abs(second))
    return pivot <= first + slack and pivot + slack >= second


# ---------------------------------------------------------------------------
# 付録の漸近式
# ---------------------------------------------------------------------------

def appendix_A1(x: float, alpha: float, spec: Optional[QuadratureSpec] = None) -> AppendixValue:
    """
    ∫_2^x dt/(t^α log t) の求積値と漸近主要項

    u = log t と置いて ∫ e^{(1−α)u}/u du を求積する。reference は指数積分による厳密値。
    """
    validate_alpha(alpha)
    if not x >= 10:
        raise DomainError(f"x は 10 以上である必要があります: {x}")
    spec = spec or QuadratureSpec()
    log_x, log_2 = math.log(x), math.log(2.0)
    beta = 1.0 - alpha

    numeric = adaptive_quad(lambda u: math.exp(beta * u) / u, log_2, log_x, spec)
    if beta == 0.0:
        reference = math.log(log_x) - math.log(log_2)
    else:
        reference = float(expi(beta * log_x) - expi(beta * log_2))

    if beta * log_x <= APPENDIX_NEAR_ONE:
        branch, asymptotic = Regime.NEAR_ONE.value, math.log(log_x)
    else:
        branch = Regime.MIDDLE.value
        asymptotic = math.exp(beta * log_x) / (beta * log_x) + math.log(log_x)
    return AppendixValue(numeric.value, asymptotic, reference, numeric.err_est, branch)


def appendix_A2(x: float, alpha: float, spec: Optional[QuadratureSpec] = None) -> AppendixValue:
    """
    ∫_2^x dt/(t^{1−α}(2 log x − log t)) の求積値と主要項 x^α/(α log x)

    reference は y = x²/t の置換で得られる x^{2α}(E₁(α log x) − E₁(α log(x²/2)))。
    """
    validate_alpha(alpha)
    if not x >= 10:
        raise DomainError(f"x は 10 以上である必要があります: {x}")
    spec = spec or QuadratureSpec()
    log_x, log_2 = math.log(x), math.log(2.0)

    numeric = adaptive_quad(lambda u: math.exp(alpha * u) / (2.0 * log_x - u), log_2, log_x, spec)
    asymptotic = math.exp(alpha * log_x) / (alpha * log_x)
    reference = math.exp(2.0 * alpha * log_x) * float(
        exp1(alpha * log_x) - exp1(alpha * (2.0 * log_x - log_2))
    )
    return AppendixValue(numeric.value, asymptotic, reference, numeric.err_est, "")


# ---------------------------------------------------------------------------
# 主要項の場合分け
# ---------------------------------------------------------------------------

def _log_log(t: float) -> float:
    if not (math.isfinite(t) and t >= MIN_THEOREM_HEIGHT):
        raise DomainError(f"t は e^e 以上である必要があります: {t}")
    return math.log(math.log(t))


def select_regime(alpha: float, t: float) -> Regime:
    """(α−1/2)log log t ≤ 1 なら NearHalf、(1−α)log log t ≤ 1 なら NearOne、それ以外は Middle"""
    validate_alpha(alpha)
    ll = _log_log(t)
    if (alpha - 0.5) * ll <= 1.0:
        return Regime.NEAR_HALF
    if (1.0 - alpha) * ll <= 1.0:
        return Regime.NEAR_ONE
    return Regime.MIDDLE


def _seam_flags(alpha: float, ll: float) -> List[str]:
    flags = []
    if abs((alpha - 0.5) * ll - 1.0) < SEAM_WIDTH:
        flags.append("near_half_seam")
    if abs((1.0 - alpha) * ll - 1.0) < SEAM_WIDTH:
        flags.append("near_one_seam")
    return flags


def _theorem_terms(alpha: float, t: float, regime: Regime):
    """上界側の (主要項, 副次項, 誤差の大きさ)"""
    log_t = math.log(t)
    ll = math.log(log_t)
    if regime is Regime.NEAR_HALF:
        main = math.log1p(math.exp((1.0 - 2.0 * alpha) * math.log(log_t))) * log_t / (2.0 * ll)
        return main, 0.0, math.exp((2.0 - 2.0 * alpha) * math.log(log_t)) / ll ** 2
    if regime is Regime.NEAR_ONE:
        return math.log(2.0 * ll), 0.0, 1.0
    growth = math.exp((2.0 - 2.0 * alpha) * math.log(log_t))
    coeff = 0.5 + (2.0 * alpha - 1.0) / (alpha * (1.0 - alpha))
    return coeff * growth / ll, math.log(2.0 * ll), growth / ((1.0 - alpha) ** 2 * ll ** 2)


def _near_half_lower(alpha: float, t: float) -> float:
    log_t = math.log(t)
    return math.log1p(-math.exp((1.0 - 2.0 * alpha) * math.log(log_t))) * log_t / (2.0 * math.log(log_t))


def _attach_actual(report: BoundReport, with_actual: bool) -> BoundReport:
    if with_actual and report.t <= ACTUAL_MAX_HEIGHT:
        actual, actual_err = log_abs_zeta(report.alpha, report.t)
        report.actual = actual
        report.actual_err = actual_err
        if report.side == "upper":
            report.slack = report.bound_value - actual
        else:
            report.slack = actual - report.bound_value
        if report.slack < 0:
            report.flags.append("negative_slack")
            logger.warning(
                f"α={report.alpha} t={report.t} の{report.side}界で余裕が負です: {report.slack:.4g}"
            )
    elif with_actual:
        report.flags.append("actual_omitted")
    return report


def theorem_upper(alpha: float, t: float, *, with_actual: bool = False) -> BoundReport:
    """log|ζ(α+it)| の上界の主要項（πΔ = log log t）"""
    regime = select_regime(alpha, t)
    ll = _log_log(t)
    main, secondary, scale = _theorem_terms(alpha, t, regime)
    report = BoundReport(
        alpha=float(alpha), t=float(t), side="upper", delta_used=ll / math.pi, regime=regime,
        main_term=main, secondary_terms=secondary, bound_value=main + secondary,
        error_scale=scale, flags=_seam_flags(alpha, ll),
    )
    return _attach_actual(report, with_actual)


def theorem_lower(alpha: float, t: float, *, with_actual: bool = False) -> BoundReport:
    """log|ζ(α+it)| の下界の主要項。NearHalf 枝は α → 1/2 で −∞ に発散する。"""
    regime = select_regime(alpha, t)
    ll = _log_log(t)
    main, secondary, scale = _theorem_terms(alpha, t, regime)
    if regime is Regime.NEAR_HALF:
        main = _near_half_lower(alpha, t)
    else:
        main, secondary = -main, -secondary
    report = BoundReport(
        alpha=float(alpha), t=float(t), side="lower", delta_used=ll / math.pi, regime=regime,
        main_term=main, secondary_terms=secondary, bound_value=main + secondary,
        error_scale=scale, flags=_seam_flags(alpha, ll),
    )
    return _attach_actual(report, with_actual)


def final_bound(
    alpha: float,
    t: float,
    delta: Optional[float] = None,
    kind: Kind = Kind.MINORANT,
    *,
    with_actual: bool = False,
) -> BoundReport:
    """
    πΔ = log log t と置く前の一般の Δ での界

    ミノラントは上界 l1/(4π)·log(t/2) + P(Δ)、マジョラントは下界 −l1/(4π)·log(t/2) − Q(Δ)。
    x = e^{2πΔ} とし、(1−α)log x ≤ 1 なら P = Q = log 2πΔ。α = 1 では Mertens 型の定数を使う。
    """
    ll = _log_log(t)
    delta = ll / math.pi if delta is None else delta
    params = ExtremalParams(alpha, delta, Kind(kind))
    regime = select_regime(alpha, t)
    log_x = 2.0 * math.pi * delta
    log_half_t = math.log(t / 2.0)
    beta = 1.0 - alpha
    near_one = beta * log_x <= 1.0
    scale = 1.0 if near_one else math.exp(beta * log_x) / (beta ** 2 * log_x ** 2)

    if params.is_minorant:
        main = l1_distance(params) / (4.0 * math.pi) * log_half_t
        if alpha == 1.0:
            secondary = math.log(2.0 * math.exp(EULER_GAMMA) * math.pi * delta)
        else:
            secondary = _prime_sum_main(log_x, alpha)
    else:
        main = -l1_distance(params) / (4.0 * math.pi) * log_half_t
        if alpha == 1.0:
            secondary = -math.log(12.0 * math.exp(EULER_GAMMA) * math.pi * delta / math.pi ** 2)
        elif near_one:
            secondary = -math.log(log_x)
        else:
            growth = math.exp(2.0 * math.pi * params.a)
            coeff = (2.0 * alpha - 1.0) / (alpha * beta)
            secondary = -growth / (growth - 1.0) * (coeff * math.exp(beta * log_x) / log_x + math.log(log_x))

    report = BoundReport(
        alpha=float(alpha), t=float(t), side="upper" if params.is_minorant else "lower",
        delta_used=float(delta), regime=regime, main_term=main, secondary_terms=secondary,
        bound_value=main + secondary, error_scale=scale, flags=_seam_flags(alpha, ll),
    )
    return _attach_actual(report, with_actual)


def seam_gap(t: float, width: float = 1e-3) -> List[SeamGap]:
    """場合分けの境界の両側で theorem_upper を評価した差（診断用）"""
    ll = _log_log(t)
    gaps = []
    for seam, centre in (("near_half", 0.5 + 1.0 / ll), ("near_one", 1.0 - 1.0 / ll)):
        below, above = centre - width, centre + width
        if not (0.5 < below and above <= 1.0):
            logger.debug(f"t={t}: 境界 {seam} (α={centre:.4f}) は範囲外のため省略します")
            continue
        low = theorem_upper(below, t).bound_value
        high = theorem_upper(above, t).bound_value
        gaps.append(SeamGap(seam, below, above, low, high, high - low))
        logger.info(f"t={t:g} の境界 {seam}: {low:.6g} → {high:.6g} (差 {high - low:.4g})")
    return gaps


# ---------------------------------------------------------------------------
# α = 1 での定数
# ---------------------------------------------------------------------------

def littlewood_bounds(t: float, *, with_actual: bool = False) -> LittlewoodReport:
    """|ζ(1+it)| ≤ 2e^γ log log t と 1/|ζ(1+it)| ≤ (12e^γ/π²) log log t の右辺"""
    ll = _log_log(t)
    upper = 2.0 * math.exp(EULER_GAMMA) * ll
    lower_reciprocal = 12.0 * math.exp(EULER_GAMMA) / math.pi ** 2 * ll
    if not (with_actual and t <= ACTUAL_MAX_HEIGHT):
        return LittlewoodReport(float(t), upper, lower_reciprocal)

    magnitude = abs(zeta_euler_maclaurin(1.0, t).value)
    report = LittlewoodReport(
        float(t), upper, lower_reciprocal,
        magnitude, 1.0 / magnitude, upper - magnitude, lower_reciprocal - 1.0 / magnitude,
    )
    if report.upper_slack < 0 or report.lower_slack < 0:
        logger.warning(f"t={t}: Littlewood 型の界を超えました ({report})")
    return report


def _primes_upto(table: VonMangoldtTable, x: float) -> np.ndarray:
    support = table.prime_powers(x)
    is_prime = np.abs(table.values[support] - np.log(support.astype(float))) < 1e-12
    return support[is_prime]


def mertens_sum(table: VonMangoldtTable, x: float) -> ComparisonValue:
    """Σ_{n≤x} Λ(n)/(n log n) と log log x + γ"""
    if not 3 <= x <= table.limit:
        raise DomainError(f"3 ≤ x ≤ {table.limit} が必要です: {x}")
    support = table.prime_powers(x).astype(float)
    value = math.fsum(table.values[support.astype(int)] / (support * np.log(support)))
    reference = math.log(math.log(x)) + EULER_GAMMA
    return ComparisonValue(value, reference, value - reference)


def euler_product_lower(table: VonMangoldtTable, x: float) -> ComparisonValue:
    """−Σ_{p≤x} log(1 + 1/p) と −log(6e^γ/π²·log x)"""
    if not 3 <= x <= table.limit:
        raise DomainError(f"3 ≤ x ≤ {table.limit} が必要です: {x}")
    primes = _primes_upto(table, x).astype(float)
    value = -math.fsum(np.log1p(1.0 / primes))
    reference = -math.log(6.0 * math.exp(EULER_GAMMA) / math.pi ** 2 * math.log(x))
    return ComparisonValue(value, reference, value - reference)


# ---------------------------------------------------------------------------
# グリッド評価
# ---------------------------------------------------------------------------

async def bound_grid(
    alphas: List[float],
    t_values: List[float],
    *,
    with_actual: bool = False,
    executor=None,
) -> List[BoundReport]:
    """(α, t) の格子で上界・下界を並行に評価し、入力順に並べて返す"""
    loop = asyncio.get_event_loop()
    tasks = []
    for alpha in alphas:
        for t in t_values:
            tasks.append(loop.run_in_executor(executor, lambda a=alpha, s=t: theorem_upper(a, s, with_actual=with_actual)))
            tasks.append(loop.run_in_executor(executor, lambda a=alpha, s=t: theorem_lower(a, s, with_actual=with_actual)))
    try:
        return list(await asyncio.gather(*tasks))
    except ExtremalZetaError as e:
        logger.error(f"界の格子評価中にエラーが発生しました: {e}", exc_info=True)
        raise
