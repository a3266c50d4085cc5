# src/core_analysis.py
"""
対象関数族 f_α と、その周辺で使う解析的な部品。

- f_α(x) = log((4 + x²) / ((α − 1/2)² + x²)) とその導関数・フーリエ変換
- 明示公式のアルキメデス項に現れる Re ψ(1/4 + iu/2)
- scipy.integrate をラップした適応型求積（打ち切り尾部の上界付き）
"""
import math
import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional, Sequence, Union

import numpy as np
from scipy import integrate
from scipy.special import bernoulli

from src.config import QuadratureSpec, validate_alpha
from src.errors import DomainError, SubdivisionLimitError

logger = logging.getLogger("extremal_zeta.core_analysis")

ArrayLike = Union[float, Sequence[float], np.ndarray]

# ψ の漸近展開に入る境界 Re(s) + |Im(s)|
DIGAMMA_ASYMPTOTIC_THRESHOLD = 12.0

# B_{2k} / (2k), k = 1..8
_B = bernoulli(16)
_STIRLING_COEFFS = np.array([_B[2 * k] / (2 * k) for k in range(1, 9)])


def scalar_or_array(values: np.ndarray, like) -> Union[float, complex, np.ndarray]:
    if np.ndim(like) == 0:
        item = np.asarray(values).reshape(-1)[0]
        return complex(item) if np.iscomplexobj(item) else float(item)
    return values


def f_alpha(x: ArrayLike, alpha: float):
    """f_α(x) を返す（配列も可）"""
    validate_alpha(alpha)
    shift_sq = (alpha - 0.5) ** 2
    x_sq = np.square(np.asarray(x, dtype=float))
    # log(1 + u) の形で遠方の桁落ちを避ける
    values = np.log1p((4.0 - shift_sq) / (shift_sq + x_sq))
    return scalar_or_array(values, x)


def f_alpha_deriv(x: ArrayLike, alpha: float):
    """f_α の導関数 2x/(x²+4) − 2x/(x²+(α−1/2)²)"""
    validate_alpha(alpha)
    shift_sq = (alpha - 0.5) ** 2
    xs = np.asarray(x, dtype=float)
    x_sq = np.square(xs)
    values = 2.0 * xs * (shift_sq - 4.0) / ((x_sq + 4.0) * (x_sq + shift_sq))
    return scalar_or_array(values, x)


def f_alpha_hat(xi: ArrayLike, alpha: float):
    """f_α のフーリエ変換 (e^{−2π|ξ|(α−1/2)} − e^{−4π|ξ|}) / |ξ|、ξ = 0 では 2π(5/2 − α)"""
    validate_alpha(alpha)
    shift = alpha - 0.5
    y = np.abs(np.asarray(xi, dtype=float))
    safe = np.where(y > 0, y, 1.0)
    with np.errstate(invalid="ignore"):
        values = (np.expm1(-2.0 * np.pi * shift * safe) - np.expm1(-4.0 * np.pi * safe)) / safe
    values = np.where(y > 0, values, 2.0 * np.pi * (2.0 - shift))
    return scalar_or_array(values, xi)


def digamma_re_quarter(u: ArrayLike):
    """
    Re ψ(1/4 + iu/2) を返す

    ψ(s) = ψ(s+1) − 1/s で Re(s) + |Im(s)| > 12 まで持ち上げ、
    8 項の Stirling 展開 log s − 1/(2s) − Σ B_{2k}/(2k s^{2k}) で評価する。
    打ち切り誤差は |B_18|/(18|s|^18) 以下で、しきい値 12 では 1e-19 未満。
    """
    us = np.asarray(u, dtype=float)
    s = 0.25 + 0.5j * us.reshape(-1)
    shift = np.zeros_like(s)

    while True:
        mask = (s.real + np.abs(s.imag)) <= DIGAMMA_ASYMPTOTIC_THRESHOLD
        if not mask.any():
            break
        shift[mask] -= 1.0 / s[mask]
        s[mask] += 1.0

    inv_sq = 1.0 / (s * s)
    series = np.zeros_like(s)
    for coeff in _STIRLING_COEFFS[::-1]:
        series = series * inv_sq + coeff
    series *= inv_sq
    values = (np.log(s) - 0.5 / s - series + shift).real
    return scalar_or_array(values.reshape(us.shape), u)


def fsum_complex(values: Iterable[complex]) -> complex:
    """複素数列の補償付き総和"""
    arr = np.asarray(list(values), dtype=complex)
    return complex(math.fsum(arr.real), math.fsum(arr.imag))


@dataclass(frozen=True)
class QuadratureResult:
    value: Union[float, np.ndarray]
    err_est: Union[float, np.ndarray]
    converged: bool
    subdivisions: int
    tail_bound: float = 0.0

    def __iter__(self) -> Iterator:
        # value, err_est = adaptive_quad(...) の形で受け取れるようにする
        yield self.value
        yield self.err_est


def _truncate_limits(a: float, b: float, spec: QuadratureSpec, tail_decay: float):
    """無限区間を truncation_radius で打ち切り、C/x² 減衰の尾部上界を返す"""
    radius = spec.truncation_radius
    lo, hi, tail = float(a), float(b), 0.0
    if math.isinf(lo):
        if lo > 0:
            raise DomainError("下端が +inf です")
        lo = -max(radius, abs(hi) + radius) if math.isfinite(hi) else -radius
        tail += tail_decay / abs(lo)
    if math.isinf(hi):
        if hi < 0:
            raise DomainError("上端が -inf です")
        hi = max(radius, abs(lo) + radius) if math.isfinite(a) else radius
        tail += tail_decay / abs(hi)
    if not lo < hi:
        raise DomainError(f"積分区間が空です: [{a}, {b}]")
    return lo, hi, tail


def adaptive_quad(
    f: Callable[[float], float],
    a: float,
    b: float,
    spec: QuadratureSpec,
    *,
    points: Optional[Sequence[float]] = None,
    tail_decay: float = 4.0,
    strict: bool = False,
) -> QuadratureResult:
    """
    QUADPACK (scipy.integrate.quad) による適応型求積

    無限端は truncation_radius で対称に打ち切り、|f| ≤ tail_decay/x² を仮定した
    尾部 tail_decay/R（片側ごと）を err_est に加える。value は打ち切り後の積分値。
    許容誤差に達しない場合は converged=False で最良値を返し、strict なら例外にする。
    """
    lo, hi, tail = _truncate_limits(a, b, spec, tail_decay)
    breakpoints = None
    if points is not None:
        breakpoints = [p for p in points if lo < p < hi] or None

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(
            f, lo, hi,
            epsabs=spec.abs_tol,
            epsrel=spec.rel_tol,
            limit=spec.max_subdivisions,
            points=breakpoints,
            full_output=1,
        )

    value, err, info = float(out[0]), float(out[1]), out[2]
    converged = len(out) == 3
    subdivisions = int(info.get("last", 0))
    logger.debug(f"quad [{lo:.6g}, {hi:.6g}]: value={value:.17g} err={err:.3g} 分割数={subdivisions}")

    if not converged:
        logger.warning(f"求積が許容誤差に達しませんでした: [{lo:.6g}, {hi:.6g}] err={err:.3g} ({out[3][:60]})")
        if strict:
            raise SubdivisionLimitError(
                f"分割上限 {spec.max_subdivisions} で収束しませんでした",
                {"value": value, "err_est": err},
            )

    return QuadratureResult(value, err + tail, converged, subdivisions, tail)


def adaptive_quad_vec(
    f: Callable[[float], np.ndarray],
    a: float,
    b: float,
    spec: QuadratureSpec,
    *,
    strict: bool = False,
) -> QuadratureResult:
    """ベクトル値関数の適応型求積（有限区間、scipy.integrate.quad_vec）"""
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise DomainError(f"quad_vec は有限区間のみ対応します: [{a}, {b}]")

    value, err, info = integrate.quad_vec(
        f, a, b,
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        norm="max",
        limit=spec.max_subdivisions,
        full_output=True,
    )
    subdivisions = int(np.shape(info.intervals)[0])
    converged = bool(info.success)
    if not converged:
        logger.warning(f"quad_vec が収束しませんでした: [{a:.6g}, {b:.6g}] err={err:.3g} ({info.message})")
        if strict:
            raise SubdivisionLimitError(f"分割上限 {spec.max_subdivisions} で収束しませんでした")

    return QuadratureResult(np.asarray(value), float(err), converged, subdivisions)
