#!/usr/bin/env python3
# view_results.py - 保存済みの台帳・界・検証結果の閲覧ツール

import os
import json
import sqlite3
import argparse
from datetime import datetime

from src.reporting import to_table


def connect_to_db(db_path="./data/results.db"):
    """SQLiteデータベースに接続する"""
    if not os.path.exists(db_path):
        print(f"エラー: データベースファイル {db_path} が見つかりません。")
        return None

    try:
        conn = sqlite3.connect(db_path)
        conn.row_factory = sqlite3.Row  # 行をディクショナリとして返す
        return conn
    except Exception as e:
        print(f"データベース接続エラー: {e}")
        return None


def format_timestamp(timestamp):
    return datetime.fromtimestamp(timestamp).strftime('%Y-%m-%d %H:%M:%S')


def _select(conn, table, conditions, params, limit):
    query = f"SELECT * FROM {table}"
    if conditions:
        query += " WHERE " + " AND ".join(conditions)
    query += " ORDER BY id DESC LIMIT ?"
    return conn.execute(query, [*params, limit]).fetchall()


def show_ledgers(conn, kind=None, alpha=None, limit=10):
    """明示公式の台帳を表示する"""
    conditions, params = [], []
    if kind:
        conditions.append("kind = ?")
        params.append(kind)
    if alpha is not None:
        conditions.append("ABS(alpha - ?) < 1e-12")
        params.append(alpha)
    rows = _select(conn, "ledgers", conditions, params, limit)

    if not rows:
        print("指定された条件に一致する台帳はありません。")
        return

    table_data = []
    for row in rows:
        report = json.loads(row["report"])
        table_data.append({
            "種類": row["kind"],
            "α": row["alpha"],
            "Δ": row["delta"],
            "t": row["t"],
            "零点側": report["zero_side"]["value"],
            "素数側": report["prime_side"]["value"],
            "残差": row["residual"],
            "予算": row["budget"],
            "釣り合い": "OK" if row["balanced"] else "NG",
            "記録時刻": format_timestamp(row["timestamp"]),
        })

    print("\n=== 明示公式の台帳 ===")
    print(to_table(table_data))


def show_bounds(conn, side=None, negative_only=False, limit=10):
    """上界・下界のレポートを表示する"""
    conditions, params = [], []
    if side:
        conditions.append("side = ?")
        params.append(side)
    if negative_only:
        conditions.append("slack < 0")
    rows = _select(conn, "bound_reports", conditions, params, limit)

    if not rows:
        print("指定された条件に一致する界のレポートはありません。")
        return

    table_data = []
    for row in rows:
        table_data.append({
            "側": row["side"],
            "α": row["alpha"],
            "t": row["t"],
            "領域": row["regime"],
            "界": row["bound_value"],
            "実測値": row["actual"] if row["actual"] is not None else "N/A",
            "余裕": row["slack"] if row["slack"] is not None else "N/A",
            "記録時刻": format_timestamp(row["timestamp"]),
        })

    print("\n=== 上界・下界 ===")
    print(to_table(table_data))


def show_verifications(conn, failed_only=False, limit=20):
    """受け入れ検証の結果を表示する"""
    rows = _select(conn, "verifications", ["passed = 0"] if failed_only else [], [], limit)

    if not rows:
        print("検証結果はありません。")
        return

    table_data = []
    for row in rows:
        table_data.append({
            "検証": row["name"],
            "結果": "PASS" if row["passed"] else "FAIL",
            "確認数": row["checked"],
            "失敗数": row["failures"],
            "記録時刻": format_timestamp(row["timestamp"]),
        })

    print("\n=== 受け入れ検証 ===")
    print(to_table(table_data))


def show_summary(conn):
    """簡易統計情報を表示する"""
    def count(query):
        return conn.execute(query).fetchone()[0]

    print(f" - 台帳件数: {count('SELECT COUNT(*) FROM ledgers')}"
          f" (釣り合わないもの {count('SELECT COUNT(*) FROM ledgers WHERE balanced = 0')})")
    print(f" - 界のレポート件数: {count('SELECT COUNT(*) FROM bound_reports')}"
          f" (余裕が負のもの {count('SELECT COUNT(*) FROM bound_reports WHERE slack < 0')})")
    print(f" - 検証件数: {count('SELECT COUNT(*) FROM verifications')}"
          f" (失敗 {count('SELECT COUNT(*) FROM verifications WHERE passed = 0')})")


def main():
    parser = argparse.ArgumentParser(description="extremal-zeta の結果閲覧ツール")
    parser.add_argument("--db", default=os.getenv("EXTREMAL_ZETA_DB", "./data/results.db"),
                        help="SQLiteデータベースのパス")

    subparsers = parser.add_subparsers(dest="command", help="実行するコマンド")

    ledgers_parser = subparsers.add_parser("ledgers", help="明示公式の台帳を表示")
    ledgers_parser.add_argument("--kind", choices=["minorant", "majorant"], help="関数の種類")
    ledgers_parser.add_argument("--alpha", type=float, help="α で絞り込む")
    ledgers_parser.add_argument("--limit", type=int, default=10, help="表示する行数")

    bounds_parser = subparsers.add_parser("bounds", help="上界・下界を表示")
    bounds_parser.add_argument("--side", choices=["upper", "lower"], help="上界か下界か")
    bounds_parser.add_argument("--negative", action="store_true", help="余裕が負のものだけ表示")
    bounds_parser.add_argument("--limit", type=int, default=10, help="表示する行数")

    verify_parser = subparsers.add_parser("verify", help="受け入れ検証の結果を表示")
    verify_parser.add_argument("--failed", action="store_true", help="失敗したものだけ表示")
    verify_parser.add_argument("--limit", type=int, default=20, help="表示する行数")

    subparsers.add_parser("all", help="すべての結果を表示")

    args = parser.parse_args()

    conn = connect_to_db(args.db)
    if not conn:
        return

    try:
        if args.command == "ledgers":
            show_ledgers(conn, args.kind, args.alpha, args.limit)
        elif args.command == "bounds":
            show_bounds(conn, args.side, args.negative, args.limit)
        elif args.command == "verify":
            show_verifications(conn, args.failed, args.limit)
        elif args.command == "all":
            show_ledgers(conn)
            show_bounds(conn)
            show_verifications(conn)
        else:
            # コマンドが指定されていない場合は簡易サマリーを表示
            print("extremal-zeta 結果閲覧ツール")
            print("コマンドを指定してください。利用可能なコマンド: ledgers, bounds, verify, all")
            print("\n簡易統計情報:")
            show_summary(conn)

            print("\n詳細を見るには、コマンドライン引数を指定してください。例:")
            print("  python view_results.py ledgers --kind minorant")
            print("  python view_results.py bounds --negative")
            print("  python view_results.py verify --failed")
    finally:
        conn.close()


if __name__ == "__main__":
    main()
