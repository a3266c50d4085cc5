# src/commands.py
"""サブコマンドの実装（main.py から呼ばれる）"""
import os
import math
import argparse
import asyncio
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional

from src.arithmetic_data import (
    generate_zero_table,
    load_or_build_sieve,
    load_or_generate_zeros,
    load_zero_table,
    write_zero_table,
)
from src.config import AppConfig, RunConfig
from src.data_management import ResultStore
from src.errors import CheckFailure, ExtremalZetaError, NearZeroSingularity, NumericalFailure
from src.explicit_formula import compute_ledger
from src.extremal_functions import (
    ExtremalParams,
    Kind,
    SeriesTruncation,
    eval_extremal,
    ft_at_zero,
    ft_numeric,
    ft_series,
    l1_distance,
    l1_numeric,
)
from src.reporting import emit, render
from src.verification import VerificationPlan, run_verification
from src.zeta_bounds import (
    final_bound,
    hadamard_identity,
    littlewood_bounds,
    sandwich_check,
    theorem_lower,
    theorem_upper,
)

logger = logging.getLogger("extremal_zeta.commands")

BOUND_COLUMNS = ["alpha", "t", "side", "regime", "bound_value", "error_scale", "actual", "actual_err", "slack"]
# --check で界と並べて確認する Δ の既定値
CHECK_DELTA = 1.0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="f_α の極値関数と明示公式による ζ の上界・下界の数値検証ツール")
    parser.add_argument("--log-level", help="ログレベル (既定は LOG_LEVEL または INFO)")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", choices=["json", "csv"], default="json", help="出力形式")
    common.add_argument("--out", dest="out_path", help="出力ファイル（省略時は標準出力）")
    common.add_argument("--no-store", dest="store", action="store_false", help="結果をデータベースに保存しない")
    common.add_argument("--abs-tol", type=float, help="求積の絶対許容誤差")
    common.add_argument("--rel-tol", type=float, help="求積の相対許容誤差")
    common.add_argument("--node-count", type=int, help="補間級数の節点の余裕")

    params = argparse.ArgumentParser(add_help=False)
    params.add_argument("--alpha", type=float, help="1/2 < α ≤ 1")
    params.add_argument("--delta", type=float, help="型のパラメータ Δ > 0")
    params.add_argument("--kind", choices=["minorant", "majorant"], default="minorant")

    subparsers = parser.add_subparsers(dest="command", required=True, help="実行するコマンド")

    eval_parser = subparsers.add_parser("eval", parents=[common, params], help="g_Δ / m_Δ とそのフーリエ変換を評価")
    eval_parser.add_argument("--x", dest="x_values", type=float, nargs="+", default=[], help="評価点")
    eval_parser.add_argument("--xi", dest="xi_values", type=float, nargs="+", default=[], help="周波数")
    eval_parser.add_argument("--ft", dest="want_ft", action="store_true", help="フーリエ変換を出力")
    eval_parser.add_argument("--l1", dest="want_l1", action="store_true", help="L¹ 距離を出力")
    eval_parser.add_argument("--numeric", action="store_true", help="求積による検算値も出力")

    ef_parser = subparsers.add_parser("explicit-formula", parents=[common, params], help="明示公式の台帳を作成")
    ef_parser.add_argument("--t", dest="t_values", type=float, nargs="+", default=[], help="高さ t")
    ef_parser.add_argument("--zeros", dest="zeros_path", help="零点ファイル（省略時は同梱の表を生成で延長）")
    ef_parser.add_argument("--sieve-limit", type=int, help="フォン・マンゴルト表の上限")

    bounds_parser = subparsers.add_parser("bounds", parents=[common], help="log|ζ(α+it)| の上界・下界を評価")
    bounds_parser.add_argument("--alpha", type=float, help="1/2 < α ≤ 1")
    bounds_parser.add_argument("--delta", type=float, help="一般の Δ での界 (final_bound) に使う Δ")
    bounds_parser.add_argument("--t", dest="t_values", type=float, nargs="+", default=[], help="高さ t")
    bounds_parser.add_argument("--with-actual", action="store_true", help="log|ζ(α+it)| を併記")
    bounds_parser.add_argument("--check", action="store_true", help="挟み込みと恒等式を確認し、破れたら終了コード 4")
    bounds_parser.add_argument("--littlewood", action="store_true", help="α = 1 での定数を評価")
    bounds_parser.add_argument("--zeros", dest="zeros_path", help="零点ファイル（--check で使用）")

    sieve_parser = subparsers.add_parser("sieve", parents=[common], help="フォン・マンゴルト表の CSV キャッシュを作成")
    sieve_parser.add_argument("--limit", dest="sieve_limit", type=int, help="上限 N")

    zeros_parser = subparsers.add_parser("zeros", parents=[common], help="Z(t) の符号変化から零点表を生成")
    zeros_parser.add_argument("--height", type=float, required=True, help="生成する高さ")

    verify_parser = subparsers.add_parser("verify", parents=[common], help="受け入れ検証の行列を実行")
    verify_parser.add_argument("--quick", action="store_true", help="縮小した行列で実行")
    verify_parser.add_argument("--zeros", dest="zeros_path", help="零点ファイル")

    return parser


def config_from_args(args: argparse.Namespace, config: AppConfig) -> RunConfig:
    def pick(name: str, default):
        value = getattr(args, name, None)
        return default if value is None else value

    run = RunConfig(
        command=args.command,
        alpha=getattr(args, "alpha", None),
        delta=getattr(args, "delta", None),
        kind=pick("kind", "minorant"),
        t_values=list(pick("t_values", [])),
        x_values=list(pick("x_values", [])),
        xi_values=list(pick("xi_values", [])),
        zeros_path=getattr(args, "zeros_path", None),
        sieve_limit=pick("sieve_limit", config.sieve_limit),
        output=pick("output", "json"),
        abs_tol=pick("abs_tol", config.quad_abs_tol),
        rel_tol=pick("rel_tol", config.quad_rel_tol),
        node_count=pick("node_count", config.node_count),
        want_ft=bool(getattr(args, "want_ft", False)),
        want_l1=bool(getattr(args, "want_l1", False)),
        numeric=bool(getattr(args, "numeric", False)),
        with_actual=bool(getattr(args, "with_actual", False)),
        check=bool(getattr(args, "check", False)),
        littlewood=bool(getattr(args, "littlewood", False)),
        height=getattr(args, "height", None),
        out_path=getattr(args, "out_path", None),
        store=bool(pick("store", True)),
        quick=bool(getattr(args, "quick", False)),
    )
    return run.validate()


def _zeros_for(run: RunConfig, config: AppConfig, height: float):
    if run.zeros_path:
        return load_zero_table(run.zeros_path)
    return load_or_generate_zeros(height, config.zero_file, config.data_dir)


def _sieve_for(run: RunConfig, config: AppConfig, limit: int):
    return load_or_build_sieve(max(limit, run.sieve_limit), config.sieve_cache)


async def _open_store(run: RunConfig, config: AppConfig) -> Optional[ResultStore]:
    if not run.store:
        return None
    store = ResultStore(config)
    await store.initialize()
    return store


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

async def cmd_eval(run: RunConfig, config: AppConfig) -> int:
    params = ExtremalParams(run.alpha, run.delta, Kind(run.kind))
    trunc = SeriesTruncation(node_count=run.node_count)
    spec = run.quadrature_spec(config)
    rows: List[Dict[str, Any]] = []

    if run.x_values:
        values, tails = eval_extremal(params, list(run.x_values), trunc)
        for x, value, tail in zip(run.x_values, values, tails):
            rows.append({"quantity": "value", "x": x, "value": float(value), "error": float(tail)})

    if run.want_ft or run.xi_values:
        xis = run.xi_values or [0.0]
        numeric = ft_numeric(params, xis, spec) if run.numeric else None
        for i, xi in enumerate(xis):
            if xi == 0.0 and not run.numeric:
                rows.append({"quantity": "ft", "xi": xi, "value": ft_at_zero(params), "error": 0.0})
                continue
            series = ft_series(params, xi, trunc)
            row = {"quantity": "ft", "xi": xi, "value": series.value, "error": series.tail_bound}
            if series.slow_convergence:
                row["flags"] = ["slow_convergence"]
            if numeric is not None:
                row["numeric"] = float(numeric.value[i])
                row["numeric_error"] = float(numeric.err_est[i])
            rows.append(row)

    if run.want_l1:
        row = {"quantity": "l1", "value": l1_distance(params), "error": 0.0}
        if run.numeric:
            check = l1_numeric(params, spec)
            row["numeric"], row["numeric_error"] = check.value, check.err_est
        rows.append(row)

    for row in rows:
        row.update({"kind": params.kind.value, "alpha": params.alpha, "delta": params.delta})
    emit(render(rows, run.output), run.out_path)
    return 0


# ---------------------------------------------------------------------------
# explicit-formula
# ---------------------------------------------------------------------------

async def cmd_explicit_formula(run: RunConfig, config: AppConfig) -> int:
    params = ExtremalParams(run.alpha, run.delta, Kind(run.kind))
    zeros = _zeros_for(run, config, 2.0 * max(run.t_values))
    table = _sieve_for(run, config, int(math.ceil(math.exp(2.0 * math.pi * params.delta))))
    spec = run.quadrature_spec(config)
    trunc = SeriesTruncation(node_count=run.node_count)
    store = await _open_store(run, config)

    rows = []
    with ThreadPoolExecutor(max_workers=config.max_workers) as executor:
        for t in run.t_values:
            report = await compute_ledger(params, t, zeros, table, spec, trunc, executor)
            rows.append(report.to_dict())
            if store:
                await store.save_ledger(rows[-1])
    if store:
        await store.cleanup()

    emit(render(rows, run.output), run.out_path)
    unbalanced = [row["t"] for row in rows if not row["balanced"]]
    if unbalanced:
        raise CheckFailure(f"明示公式の残差が予算を超えました: t = {unbalanced}")
    return 0


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------

def _bound_rows(run: RunConfig) -> List[Dict[str, Any]]:
    rows = []
    for t in run.t_values:
        if run.littlewood:
            report = littlewood_bounds(t, with_actual=run.with_actual)
            rows.append({"quantity": "littlewood", **report._asdict()})
        if run.alpha is None:
            continue
        if run.delta is not None:
            for kind in Kind:
                rows.append(final_bound(run.alpha, t, run.delta, kind, with_actual=run.with_actual).to_dict())
        else:
            rows.append(theorem_upper(run.alpha, t, with_actual=run.with_actual).to_dict())
            rows.append(theorem_lower(run.alpha, t, with_actual=run.with_actual).to_dict())
    return rows


def _check_rows(run: RunConfig, config: AppConfig) -> List[Dict[str, Any]]:
    zeros = _zeros_for(run, config, 2.0 * max(run.t_values))
    delta = run.delta or CHECK_DELTA
    rows = []
    for t in run.t_values:
        try:
            identity = hadamard_identity(run.alpha, t, zeros)
            upper = sandwich_check(ExtremalParams(run.alpha, delta, Kind.MINORANT), t, zeros)
            lower = sandwich_check(ExtremalParams(run.alpha, delta, Kind.MAJORANT), t, zeros)
        except NearZeroSingularity as e:
            logger.warning(f"t={t} は ζ の零点に近いため確認を省きます: {e}")
            continue
        rows.append({
            "quantity": "check", "alpha": run.alpha, "t": t, "delta": delta,
            "identity_residual": identity.residual, "identity_budget": identity.budget,
            "upper": upper.bound, "upper_budget": upper.budget,
            "lower": lower.bound, "lower_budget": lower.budget,
            "actual": upper.actual,
            "holds": bool(abs(identity.residual) <= identity.budget and upper.holds and lower.holds
                          and upper.bound >= lower.bound),
        })
    return rows


async def cmd_bounds(run: RunConfig, config: AppConfig) -> int:
    loop = asyncio.get_event_loop()
    rows = await loop.run_in_executor(None, _bound_rows, run)
    checks = []
    if run.check and run.alpha is not None:
        checks = await loop.run_in_executor(None, _check_rows, run, config)

    store = await _open_store(run, config)
    if store:
        for row in rows:
            if "regime" in row:
                await store.save_bound_report(row)
        await store.cleanup()

    columns = None
    if run.output == "csv" and all("regime" in row for row in rows) and not checks:
        columns = BOUND_COLUMNS
    emit(render(rows + checks, run.output, columns), run.out_path)

    if run.check:
        failed = [row["t"] for row in checks if not row["holds"]]
        failed += [row["t"] for row in rows if row.get("quantity") == "littlewood"
                   and row.get("upper_slack") is not None and (row["upper_slack"] < 0 or row["lower_slack"] < 0)]
        if failed:
            raise CheckFailure(f"界の確認に失敗しました: t = {failed}")
    return 0


# ---------------------------------------------------------------------------
# sieve / zeros
# ---------------------------------------------------------------------------

async def cmd_sieve(run: RunConfig, config: AppConfig) -> int:
    path = run.out_path or config.sieve_cache
    table = load_or_build_sieve(run.sieve_limit, path)
    rows = [{
        "limit": table.limit,
        "prime_powers": len(table.entries),
        "chebyshev_psi": table.chebyshev_psi(),
        "cache": path,
    }]
    emit(render(rows, run.output))
    return 0


async def cmd_zeros(run: RunConfig, config: AppConfig) -> int:
    path = run.out_path or os.path.join(config.data_dir, f"zeros_{int(math.ceil(run.height))}.txt")
    table = await asyncio.get_event_loop().run_in_executor(None, generate_zero_table, run.height)
    write_zero_table(table, path)
    rows = [{
        "height": table.coverage_height,
        "count": len(table),
        "first": float(table.ordinates[0]),
        "last": float(table.ordinates[-1]),
        "path": path,
    }]
    emit(render(rows, run.output))
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

async def cmd_verify(run: RunConfig, config: AppConfig) -> int:
    plan = VerificationPlan.quick() if run.quick else VerificationPlan.full()
    zeros = _zeros_for(run, config, plan.zero_height)
    table = _sieve_for(run, config, plan.sieve_limit)
    spec = run.quadrature_spec(config)

    with ThreadPoolExecutor(max_workers=config.max_workers) as executor:
        outcomes = await run_verification(plan, zeros, table, spec, executor)
    rows = [outcome.to_dict() for outcome in outcomes]

    store = await _open_store(run, config)
    if store:
        for row in rows:
            await store.save_verification(row)
        await store.cleanup()

    emit(render(rows, run.output, ["name", "passed", "checked", "failures", "elapsed"]), run.out_path)
    failed = [row["name"] for row in rows if not row["passed"]]
    if failed:
        raise CheckFailure(f"受け入れ検証に失敗しました: {failed}")
    return 0


COMMANDS = {
    "eval": cmd_eval,
    "explicit-formula": cmd_explicit_formula,
    "bounds": cmd_bounds,
    "sieve": cmd_sieve,
    "zeros": cmd_zeros,
    "verify": cmd_verify,
}


async def dispatch(run: RunConfig, config: AppConfig) -> int:
    try:
        return await COMMANDS[run.command](run, config)
    except ExtremalZetaError as e:
        logger.error(f"{run.command} の実行中にエラーが発生しました: {e}", exc_info=True)
        return e.exit_code
    except (ValueError, ArithmeticError) as e:
        failure = NumericalFailure(f"{run.command} の数値計算が失敗しました: {e}", {"type": type(e).__name__})
        logger.error(str(failure), exc_info=True)
        return failure.exit_code
