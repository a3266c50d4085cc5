# src/verification.py
"""
受け入れ検証の行列をまとめて実行する

各グループは独立に評価でき、verify サブコマンドはそれらを別スレッドで並行に走らせる。
失敗はグループごとに件数と最初の数件の内容で報告する。
"""
import math
import time
import asyncio
import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from scipy.optimize import brentq

from src.arithmetic_data import (
    FIRST_ZERO,
    VonMangoldtTable,
    ZeroTable,
    hardy_z,
    zeta_euler_maclaurin,
)
from src.config import QuadratureSpec
from src.core_analysis import f_alpha
from src.errors import ExtremalZetaError, NearZeroSingularity
from src.explicit_formula import ledger
from src.extremal_functions import (
    ExtremalParams,
    Kind,
    eval_extremal,
    ft_at_zero,
    ft_numeric,
    ft_series,
    l1_distance,
    l1_numeric,
)
from src.zeta_bounds import (
    appendix_A1,
    appendix_A2,
    hadamard_identity,
    lemma_bound_sum_k,
    lemma_initial_ineq,
    littlewood_bounds,
    sandwich_check,
    theorem_upper,
)

logger = logging.getLogger("extremal_zeta.verification")

# 失敗の詳細は先頭のこの件数だけ残す
MAX_REPORTED_FAILURES = 10
RANDOM_SEED = 20240101


@dataclass
class VerificationOutcome:
    name: str
    checked: int = 0
    failures: int = 0
    elapsed: float = 0.0
    detail: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.checked > 0 and self.failures == 0

    def record(self, ok: bool, **info) -> None:
        self.checked += 1
        if not ok:
            self.failures += 1
            examples = self.detail.setdefault("examples", [])
            if len(examples) < MAX_REPORTED_FAILURES:
                examples.append(info)

    def record_many(self, count: int, failures: int, **info) -> None:
        self.checked += count
        self.failures += failures
        examples = self.detail.setdefault("examples", [])
        if failures and len(examples) < MAX_REPORTED_FAILURES:
            examples.append(dict(info, failures=failures))

    def to_dict(self) -> Dict[str, Any]:
        report = asdict(self)
        report["passed"] = self.passed
        return report


@dataclass
class VerificationPlan:
    alphas: List[float]
    deltas: List[float]
    ledger_deltas: List[float]
    ledger_heights: List[float]
    identity_heights: List[float]
    x_step: float
    random_xis: int
    littlewood_samples: int
    lemma_heights: List[float]

    @classmethod
    def full(cls) -> "VerificationPlan":
        return cls(
            alphas=[0.6, 0.75, 1.0], deltas=[0.5, 1.0, 2.0], ledger_deltas=[0.5, 1.0],
            ledger_heights=[50.0, 100.0, 250.0, 500.0], identity_heights=[100.0, 500.0, 1000.0],
            x_step=0.01, random_xis=20, littlewood_samples=100, lemma_heights=[1e2, 1e4, 1e6],
        )

    @classmethod
    def quick(cls) -> "VerificationPlan":
        return cls(
            alphas=[0.75, 1.0], deltas=[1.0], ledger_deltas=[1.0],
            ledger_heights=[100.0], identity_heights=[100.0],
            x_step=0.1, random_xis=5, littlewood_samples=10, lemma_heights=[1e2, 1e4],
        )

    @property
    def zero_height(self) -> float:
        return 2.0 * max(self.ledger_heights + self.identity_heights)

    @property
    def sieve_limit(self) -> int:
        return int(math.ceil(math.exp(2.0 * math.pi * max(self.ledger_deltas))))


# ---------------------------------------------------------------------------
# 検証グループ
# ---------------------------------------------------------------------------

def check_sandwich(plan: VerificationPlan, outcome: VerificationOutcome) -> None:
    xs = np.round(np.arange(-50.0, 50.0 + plan.x_step / 2, plan.x_step), 10)
    for alpha in plan.alphas:
        target = f_alpha(xs, alpha)
        for delta in plan.deltas:
            low, low_tail = eval_extremal(ExtremalParams(alpha, delta, Kind.MINORANT), xs)
            high, high_tail = eval_extremal(ExtremalParams(alpha, delta, Kind.MAJORANT), xs)
            bad = (low > target + low_tail) | (high < target - high_tail)
            first = float(xs[np.argmax(bad)]) if bad.any() else None
            outcome.record_many(xs.size, int(bad.sum()), alpha=alpha, delta=delta, first_x=first)


def check_fourier(plan: VerificationPlan, outcome: VerificationOutcome, spec: QuadratureSpec) -> None:
    rng = np.random.default_rng(RANDOM_SEED)
    for alpha in plan.alphas:
        for delta in plan.deltas:
            for kind in Kind:
                params = ExtremalParams(alpha, delta, kind)
                xis = np.sort(rng.uniform(0.0, delta, plan.random_xis))
                probes = np.concatenate([xis, [1.2 * delta, 2.0 * delta]])
                numeric = ft_numeric(params, probes, spec)
                for i, xi in enumerate(probes):
                    expected = ft_series(params, float(xi))
                    gap = abs(numeric.value[i] - expected.value)
                    ok = gap <= numeric.err_est[i] + expected.tail_bound + 1e-6
                    outcome.record(ok, kind=kind.value, alpha=alpha, delta=delta, xi=float(xi), gap=gap)


def check_l1(plan: VerificationPlan, outcome: VerificationOutcome, spec: QuadratureSpec) -> None:
    for alpha in plan.alphas:
        total = 2.0 * math.pi * (2.5 - alpha)
        for delta in plan.deltas:
            low = ExtremalParams(alpha, delta, Kind.MINORANT)
            high = low.with_kind(Kind.MAJORANT)
            for params in (low, high):
                gap = abs(l1_numeric(params, spec).value - l1_distance(params))
                outcome.record(gap <= 1e-5, kind=params.kind.value, alpha=alpha, delta=delta, gap=gap)
            identity = max(
                abs(ft_at_zero(low) + l1_distance(low) - total),
                abs(ft_at_zero(high) - l1_distance(high) - total),
            )
            outcome.record(identity <= 1e-12, alpha=alpha, delta=delta, identity=identity)


def check_ledgers(plan, outcome, zeros, table, spec) -> None:
    for alpha in plan.alphas:
        for delta in plan.ledger_deltas:
            for kind in Kind:
                params = ExtremalParams(alpha, delta, kind)
                for t in plan.ledger_heights:
                    report = ledger(params, t, zeros, table, spec)
                    outcome.record(
                        report.balanced, kind=kind.value, alpha=alpha, delta=delta, t=t,
                        residual=report.residual, budget=report.budget,
                    )


def check_identity(plan, outcome, zeros) -> None:
    for alpha in plan.alphas:
        for t in plan.identity_heights:
            check = hadamard_identity(alpha, t, zeros)
            outcome.record(abs(check.residual) <= check.budget, alpha=alpha, t=t, residual=check.residual)


def check_bound_sandwich(plan, outcome, zeros) -> None:
    for alpha in plan.alphas:
        for delta in plan.ledger_deltas:
            for t in plan.ledger_heights:
                try:
                    upper = sandwich_check(ExtremalParams(alpha, delta, Kind.MINORANT), t, zeros)
                    lower = sandwich_check(ExtremalParams(alpha, delta, Kind.MAJORANT), t, zeros)
                except NearZeroSingularity:
                    logger.info(f"α={alpha} t={t} は ζ の零点に近いため挟み込みの確認を省きます")
                    continue
                outcome.record(upper.holds and lower.holds and upper.bound >= lower.bound,
                               alpha=alpha, delta=delta, t=t, upper=upper.bound, lower=lower.bound)


def check_lemmas(plan, outcome) -> None:
    for x in plan.lemma_heights:
        for n in sorted({2.0, 3.0, math.sqrt(x), x - 1.0, x}):
            for alpha in (0.55, 0.6, 0.75, 0.9, 1.0):
                for k in range(0, 51):
                    outcome.record(lemma_initial_ineq(k, n, x, alpha), lemma="initial", k=k, n=n, x=x, alpha=alpha)
                    if k >= 1:
                        outcome.record(lemma_bound_sum_k(k, n, x, alpha), lemma="sum_k", k=k, n=n, x=x, alpha=alpha)


def check_appendix(plan, outcome, spec) -> None:
    grid = [1e3, 1e4, 1e5, 1e6]
    for alpha in (0.6, 0.75):
        a1 = [appendix_A1(x, alpha, spec) for x in grid]
        a2 = [appendix_A2(x, alpha, spec) for x in grid]
        for x, one, two in zip(grid, a1, a2):
            log_x = math.log(x)
            # 分岐によらず主要項 x^{1−α}/((1−α)log x) + log log x と比べる
            leading = x ** (1.0 - alpha) / ((1.0 - alpha) * log_x) + math.log(log_x)
            outcome.record(abs(one.numeric / leading - 1.0) <= 2.0 / ((1.0 - alpha) * log_x),
                           integral="A1", alpha=alpha, x=x)
            outcome.record(abs(two.numeric / two.asymptotic - 1.0) <= 2.0 / (alpha * log_x),
                           integral="A2", alpha=alpha, x=x)
            outcome.record(abs(two.numeric - two.reference) <= 1e-8 * abs(two.reference) + two.err_est,
                           integral="A2-substitution", alpha=alpha, x=x)
        deviations = [abs(two.numeric / two.asymptotic - 1.0) for two in a2]
        outcome.record(all(b < a for a, b in zip(deviations, deviations[1:])), integral="A2-monotone", alpha=alpha)
    exact = appendix_A1(10.0, 1.0, spec)
    outcome.record(abs(exact.numeric - exact.reference) <= 1e-9, integral="A1-exact")


def check_littlewood(plan, outcome) -> None:
    heights = np.geomspace(1e3, 1e5, plan.littlewood_samples)
    for t in heights:
        report = littlewood_bounds(float(t), with_actual=True)
        outcome.record(report.upper_slack > 0 and report.lower_slack > 0, t=float(t))


def check_near_half(plan, outcome) -> None:
    t = 1e10
    ll = math.log(math.log(t))
    target = math.log(2.0) / 2.0 * math.log(t) / ll
    report = theorem_upper(0.5 + 1e-3 / ll, t)
    outcome.record(abs(report.main_term / target - 1.0) <= 2e-3, main=report.main_term, target=target)


def check_backend(plan, outcome, zeros) -> None:
    outcome.record(abs(zeta_euler_maclaurin(2.0, 0.0).value - math.pi ** 2 / 6.0) <= 1e-9, check="zeta(2)")
    first = brentq(hardy_z, 14.0, 14.3, xtol=1e-12)
    outcome.record(abs(first - FIRST_ZERO) <= 1e-4, check="first_zero", value=first)
    try:
        zeros.check_count()
        outcome.record(True, check="zero_count")
    except ExtremalZetaError as e:
        outcome.record(False, check="zero_count", error=str(e))


# ---------------------------------------------------------------------------
# 実行
# ---------------------------------------------------------------------------

def _timed(name: str, check: Callable[[VerificationOutcome], None]) -> VerificationOutcome:
    outcome = VerificationOutcome(name)
    started = time.perf_counter()
    try:
        check(outcome)
    except ExtremalZetaError as e:
        logger.error(f"検証 {name} の実行中にエラーが発生しました: {e}", exc_info=True)
        outcome.record(False, error=str(e), error_type=type(e).__name__)
    outcome.elapsed = time.perf_counter() - started
    level = logging.INFO if outcome.passed else logging.WARNING
    logger.log(level, f"検証 {name}: {outcome.checked} 件中 {outcome.failures} 件失敗 ({outcome.elapsed:.1f} 秒)")
    return outcome


async def run_verification(
    plan: VerificationPlan,
    zeros: ZeroTable,
    table: VonMangoldtTable,
    spec: Optional[QuadratureSpec] = None,
    executor=None,
) -> List[VerificationOutcome]:
    """全グループを並行に実行し、定義順に結果を返す"""
    spec = spec or QuadratureSpec()
    groups = [
        ("sandwich", lambda o: check_sandwich(plan, o)),
        ("fourier", lambda o: check_fourier(plan, o, spec)),
        ("l1", lambda o: check_l1(plan, o, spec)),
        ("explicit_formula", lambda o: check_ledgers(plan, o, zeros, table, spec)),
        ("hadamard_identity", lambda o: check_identity(plan, o, zeros)),
        ("bound_sandwich", lambda o: check_bound_sandwich(plan, o, zeros)),
        ("lemmas", lambda o: check_lemmas(plan, o)),
        ("appendix", lambda o: check_appendix(plan, o, spec)),
        ("littlewood", lambda o: check_littlewood(plan, o)),
        ("near_half", lambda o: check_near_half(plan, o)),
        ("backend", lambda o: check_backend(plan, o, zeros)),
    ]
    loop = asyncio.get_event_loop()
    tasks = [loop.run_in_executor(executor, _timed, name, check) for name, check in groups]
    return list(await asyncio.gather(*tasks))
