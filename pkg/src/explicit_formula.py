# src/explicit_formula.py
"""
h(z) = F(t − z)（F = g_Δ または m_Δ）に対する明示公式の両辺を項ごとに評価し、
残差と誤差予算を台帳 (ExplicitFormulaLedger) にまとめる。

    Σ_ρ h(γ) = h(1/2i) + h(−1/2i) − (1/2π)ĥ(0)log π
               + (1/2π)∫ h(u) Re ψ(1/4 + iu/2) du
               − (1/2π)Σ Λ(n)/√n · (ĥ(log n/2π) + ĥ(−log n/2π))
"""
import math
import asyncio
import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional

import numpy as np
from scipy.special import loggamma

from src.arithmetic_data import VonMangoldtTable, ZeroTable
from src.config import QuadratureSpec
from src.core_analysis import adaptive_quad, adaptive_quad_vec, digamma_re_quarter, f_alpha
from src.errors import DomainError, ExtremalZetaError, InsufficientCoverage, TableTooSmall
from src.extremal_functions import (
    ExtremalParams,
    SeriesTruncation,
    envelope_constant,
    eval_extremal,
    far_field_profile,
    ft_at_zero,
    ft_series,
)

logger = logging.getLogger("extremal_zeta.explicit_formula")

MIN_HEIGHT = 20.0
# アルキメデス項の被積分関数で使う補間節点の余裕
ARCHIMEDEAN_NODE_COUNT = 200


class LedgerTerm(NamedTuple):
    value: float
    error: float


class ZeroSideValue(NamedTuple):
    sum: float
    tail: float
    truncation: float = 0.0
    zeros_used: int = 0


class PoleTermsValue(NamedTuple):
    value: float
    imag: float
    tail: float


class ArchimedeanValue(NamedTuple):
    value: float
    err: float
    closed_form: float = 0.0
    residual: float = 0.0
    tail_model: float = 0.0
    radius: float = 0.0


@dataclass
class ExplicitFormulaLedger:
    alpha: float
    delta: float
    kind: str
    t: float
    zero_side: LedgerTerm
    pole_terms: LedgerTerm
    log_pi_term: LedgerTerm
    archimedean: LedgerTerm
    prime_side: LedgerTerm
    residual: float
    budget: float
    budget_components: Dict[str, float] = field(default_factory=dict)
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def balanced(self) -> bool:
        return abs(self.residual) <= self.budget

    def to_dict(self) -> Dict[str, Any]:
        report = asdict(self)
        for name in ("zero_side", "pole_terms", "log_pi_term", "archimedean", "prime_side"):
            term = getattr(self, name)
            report[name] = {"value": term.value, "error": term.error}
        report["residual"] = {"value": self.residual, "error": self.budget}
        report["balanced"] = self.balanced
        return report


def _check_height(t: float):
    if not (math.isfinite(t) and t >= MIN_HEIGHT):
        raise DomainError(f"t は {MIN_HEIGHT:g} 以上である必要があります: {t}")


# ---------------------------------------------------------------------------
# 零点側
# ---------------------------------------------------------------------------

def zero_tail_bound(t: float, height: float, constant: float) -> float:
    """
    省いた零点 γ > T からの Σ[|F(t−γ)| + |F(t+γ)|] の上界（|F(x)| ≤ C/x² を仮定）

    零点密度 (1/2π)log(γ/2π) の積分を閉形式で評価し、
    S(T) の大きさ 0.112 log T + 0.278 log log T + 2.51 の分を境界項として加える。
    """
    if not height > t > 0:
        raise DomainError(f"T > t > 0 が必要です: T={height}, t={t}")
    log_density = math.log(height / (2.0 * math.pi))
    minus = (log_density / (height - t) + math.log(height / (height - t)) / t) / (2.0 * math.pi)
    plus = (log_density / (height + t) + math.log((height + t) / height) / t) / (2.0 * math.pi)
    counting = 0.112 * math.log(height) + 0.278 * math.log(math.log(height)) + 2.51
    boundary = 2.0 * counting * (1.0 / (height - t) ** 2 + 1.0 / (height + t) ** 2)
    return constant * (minus + plus + boundary)


def zero_side(
    params: ExtremalParams,
    t: float,
    zeros: ZeroTable,
    trunc: Optional[SeriesTruncation] = None,
) -> ZeroSideValue:
    """Σ_γ F(t − γ) を ±γ の両方について表の零点で和をとる"""
    _check_height(t)
    if zeros.coverage_height < 2.0 * t:
        raise InsufficientCoverage(
            f"零点表の高さ {zeros.coverage_height:g} が 2t = {2.0 * t:g} に足りません",
            {"coverage_height": zeros.coverage_height, "t": t},
        )

    gammas = zeros.ordinates
    points = np.sort(np.concatenate([t - gammas, t + gammas]))
    values, tails = eval_extremal(params, points, trunc)
    total = math.fsum(values)
    truncation = math.fsum(tails)
    tail = zero_tail_bound(t, zeros.coverage_height, envelope_constant(params))
    logger.debug(
        f"{params.label()} t={t}: 零点 {len(zeros)} 個で和 {total:.12g} (尾部 {tail:.3g}, 打ち切り {truncation:.3g})"
    )
    return ZeroSideValue(total, tail, truncation, len(zeros))


# ---------------------------------------------------------------------------
# 解析的な項
# ---------------------------------------------------------------------------

def pole_terms(params: ExtremalParams, t: float, trunc: Optional[SeriesTruncation] = None) -> PoleTermsValue:
    """h(1/2i) + h(−1/2i) = F(t + i/2) + F(t − i/2)"""
    values, tails = eval_extremal(params, np.array([t + 0.5j, t - 0.5j]), trunc)
    total = complex(values[0] + values[1])
    if abs(total.imag) > 1e-9:
        logger.warning(f"{params.label()} t={t}: 極の項の虚部が打ち消されていません ({total.imag:.3g})")
    return PoleTermsValue(total.real, total.imag, float(tails.sum()))


def log_pi_term(params: ExtremalParams) -> float:
    """−(1/2π)ĥ(0)log π（ĥ(0) = F̂(0)）"""
    return -ft_at_zero(params) * math.log(math.pi) / (2.0 * math.pi)


def digamma_f_integral(alpha: float, t: float) -> float:
    """
    (1/2π)∫ f_α(x) Re ψ(1/4 + i(t−x)/2) dx の閉形式

    ψ(1/4 + iu/2) は Im u ≤ 0 で正則なので、ポアソン核の積分として
    2 Re[log Γ(5/4 + it/2) − log Γ(α/2 + it/2)] に等しい。
    """
    return 2.0 * float(np.real(loggamma(1.25 + 0.5j * t) - loggamma(0.5 * alpha + 0.5j * t)))


def archimedean_radius(t: float) -> float:
    return 4.0 * math.sqrt(t) * max(1.0, math.log(t))


def _digamma_envelope(x: float, t: float) -> float:
    """|x| ≥ R での |Re ψ(1/4 + i(t∓x)/2)| の上界"""
    return math.log((x + t) / 2.0 + 2.0) + 5.0


def _weighted_tail(radius: float, t: float) -> float:
    """∫_R^∞ (log((x+t)/2 + 2) + 5)/x² dx の上界"""
    shifted = radius + t + 4.0
    return (math.log(shifted / 2.0) + 5.0) / radius + math.log(shifted / radius) / (t + 4.0)


def archimedean_term(
    params: ExtremalParams,
    t: float,
    spec: Optional[QuadratureSpec] = None,
    trunc: Optional[SeriesTruncation] = None,
    *,
    strict: bool = False,
) -> ArchimedeanValue:
    """
    (1/2π)∫ F(x) Re ψ(1/4 + i(t−x)/2) dx

    f_α の部分は閉形式 digamma_f_integral で求め、残り (F − f_α)ψ を |x| ≤ R で求積する。
    R = 4√t·max(1, log t)。中央の 2 セルは直接、外側はセル幅 1/Δ で折り畳んで積分する。
    |x| > R は (F − f_α) ≈ c/x² の遠方モデルで補い、モデルの残差を誤差に含める。
    """
    _check_height(t)
    spec = spec or QuadratureSpec()
    trunc = trunc or SeriesTruncation(node_count=ARCHIMEDEAN_NODE_COUNT)
    alpha = params.alpha
    cell = 1.0 / params.delta
    n_cells = max(2, int(math.ceil(archimedean_radius(t) * params.delta)))
    radius = n_cells * cell

    closed = digamma_f_integral(alpha, t)

    def residual_at(x):
        xs = np.atleast_1d(x)
        values, tails = eval_extremal(params, xs, trunc)
        weights = digamma_re_quarter(t - xs)
        return (values - f_alpha(xs, alpha)) * weights, tails * np.abs(weights)

    # 中央 [−h, h]: f_α の鋭いピークを含む
    central = adaptive_quad(
        lambda x: float(residual_at(x)[0][0]), -cell, cell, spec, points=(0.0,), strict=strict
    )
    central_tail = adaptive_quad(lambda x: float(residual_at(x)[1][0]), -cell, cell, spec)

    # 外側 h ≤ |x| ≤ R を幅 h のセルに折り畳む
    starts = np.concatenate([-radius + np.arange(n_cells - 1) * cell, cell + np.arange(n_cells - 1) * cell])

    def folded(s):
        weighted, tails = residual_at(starts + s)
        return np.array([weighted.sum(), tails.sum()])

    outer = adaptive_quad_vec(folded, 0.0, cell, spec, strict=strict)
    inside = central.value + outer.value[0]
    inside_err = central.err_est + central_tail.value + outer.err_est + outer.value[1]

    # |x| > R の遠方モデル
    far = far_field_profile(params, radius, trunc)
    upper = 1.0 / radius
    breakpoints = (1.0 / t,) if 1.0 / t < upper else None
    model_integral = adaptive_quad(
        lambda u: digamma_re_quarter(t - 1.0 / u) + digamma_re_quarter(t + 1.0 / u) if u > 0 else 0.0,
        0.0, upper, spec, points=breakpoints,
    )
    tail_model = far.mean * model_integral.value
    envelope = _digamma_envelope(radius, t)
    model_err = 2.0 * (
        3.0 * far.amplitude * envelope / (math.pi * params.delta * radius ** 2)
        + far.drift * radius * params.delta * _weighted_tail(radius, t)
    ) + abs(far.mean) * model_integral.err_est

    value = closed + (inside + tail_model) / (2.0 * math.pi)
    err = (inside_err + model_err) / (2.0 * math.pi)
    logger.debug(
        f"{params.label()} t={t}: アルキメデス項 {value:.12g} (閉形式 {closed:.12g}, R={radius:g}, 誤差 {err:.3g})"
    )
    return ArchimedeanValue(value, err, closed, inside / (2.0 * math.pi), tail_model / (2.0 * math.pi), radius)


# ---------------------------------------------------------------------------
# 素数側
# ---------------------------------------------------------------------------

def prime_cutoff(params: ExtremalParams) -> int:
    """F̂(log n/2π) ≠ 0 となりうる最大の n = floor(e^{2πΔ})"""
    return int(math.floor(math.exp(2.0 * math.pi * params.delta)))


def prime_side(params: ExtremalParams, t: float, table: VonMangoldtTable) -> LedgerTerm:
    """−(1/2π) Σ_{n ≤ e^{2πΔ}} Λ(n)/√n · F̂(log n/2π) · 2cos(t log n)"""
    if t < 0:
        raise DomainError(f"t は非負である必要があります: {t}")
    cutoff = prime_cutoff(params)
    required = int(math.ceil(math.exp(2.0 * math.pi * params.delta)))
    if table.limit < required:
        raise TableTooSmall(
            f"フォン・マンゴルト表の上限 {table.limit} が e^(2πΔ) = {required} に足りません",
            {"limit": table.limit, "required": required},
        )

    terms = []
    error = 0.0
    for n in table.prime_powers(cutoff):
        log_n = math.log(n)
        transform = ft_series(params, log_n / (2.0 * math.pi))
        weight = table.values[n] / math.sqrt(n)
        terms.append(weight * transform.value * 2.0 * math.cos(t * log_n))
        error += 2.0 * weight * transform.tail_bound
    value = -math.fsum(terms) / (2.0 * math.pi)
    logger.debug(f"{params.label()} t={t}: 素数側 {value:.12g} ({len(terms)} 項, n ≤ {cutoff})")
    return LedgerTerm(value, error / (2.0 * math.pi))


# ---------------------------------------------------------------------------
# 台帳の組み立て
# ---------------------------------------------------------------------------

def _assemble(params, t, zeros_value, poles, archimedean, primes) -> ExplicitFormulaLedger:
    log_pi = log_pi_term(params)
    right = math.fsum([poles.value, log_pi, archimedean.value, primes.value])
    residual = zeros_value.sum - right
    components = {
        "zero_tail": zeros_value.tail,
        "zero_truncation": zeros_value.truncation,
        "pole_truncation": poles.tail,
        "archimedean": archimedean.err,
        "prime_series": primes.error,
    }
    budget = math.fsum(components.values())
    ledger = ExplicitFormulaLedger(
        alpha=params.alpha,
        delta=params.delta,
        kind=params.kind.value,
        t=float(t),
        zero_side=LedgerTerm(zeros_value.sum, zeros_value.tail + zeros_value.truncation),
        pole_terms=LedgerTerm(poles.value, poles.tail),
        log_pi_term=LedgerTerm(log_pi, 0.0),
        archimedean=LedgerTerm(archimedean.value, archimedean.err),
        prime_side=primes,
        residual=residual,
        budget=budget,
        budget_components=components,
        diagnostics={
            "zeros_used": zeros_value.zeros_used,
            "pole_imag": poles.imag,
            "archimedean_closed_form": archimedean.closed_form,
            "archimedean_radius": archimedean.radius,
            "prime_cutoff": prime_cutoff(params),
        },
    )
    if ledger.balanced:
        logger.info(f"{params.label()} t={t}: 残差 {residual:.3g} は予算 {budget:.3g} 以内です")
    else:
        logger.warning(f"{params.label()} t={t}: 残差 {residual:.3g} が予算 {budget:.3g} を超えています")
    return ledger


async def compute_ledger(
    params: ExtremalParams,
    t: float,
    zeros: ZeroTable,
    table: VonMangoldtTable,
    spec: Optional[QuadratureSpec] = None,
    trunc: Optional[SeriesTruncation] = None,
    executor=None,
) -> ExplicitFormulaLedger:
    """4 つの重い項を別スレッドで並行に計算して台帳を組み立てる"""
    _check_height(t)
    loop = asyncio.get_event_loop()
    try:
        zeros_value, poles, archimedean, primes = await asyncio.gather(
            loop.run_in_executor(executor, zero_side, params, t, zeros, trunc),
            loop.run_in_executor(executor, pole_terms, params, t, trunc),
            loop.run_in_executor(executor, archimedean_term, params, t, spec),
            loop.run_in_executor(executor, prime_side, params, t, table),
        )
    except ExtremalZetaError as e:
        logger.error(f"{params.label()} t={t} の台帳計算中にエラーが発生しました: {e}", exc_info=True)
        raise
    return _assemble(params, t, zeros_value, poles, archimedean, primes)


def ledger(
    params: ExtremalParams,
    t: float,
    zeros: ZeroTable,
    table: VonMangoldtTable,
    spec: Optional[QuadratureSpec] = None,
    trunc: Optional[SeriesTruncation] = None,
) -> ExplicitFormulaLedger:
    """compute_ledger の同期版"""
    return asyncio.run(compute_ledger(params, t, zeros, table, spec, trunc))


async def compute_ledgers(
    params_list: List[ExtremalParams],
    t_values: List[float],
    zeros: ZeroTable,
    table: VonMangoldtTable,
    spec: Optional[QuadratureSpec] = None,
    executor=None,
) -> List[ExplicitFormulaLedger]:
    """(パラメータ, t) の全組み合わせを入力順に計算する"""
    results = []
    for params in params_list:
        for t in t_values:
            results.append(await compute_ledger(params, t, zeros, table, spec, executor=executor))
    return results
