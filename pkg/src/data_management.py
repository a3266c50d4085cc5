# src/data_management.py
import os
import json
import time
import asyncio
import logging
import sqlite3
from typing import Any, Dict, List, Optional

from src.config import AppConfig

logger = logging.getLogger("extremal_zeta.data_management")


class ResultStore:
    """台帳・界のレポート・検証結果を SQLite に保存する"""

    def __init__(self, config: AppConfig, db_path: Optional[str] = None):
        self.config = config
        self.db_path = db_path or config.db_path

        # ディレクトリの作成
        os.makedirs(os.path.dirname(os.path.abspath(self.db_path)), exist_ok=True)

    async def initialize(self):
        try:
            # sqlite3 は同期 API なので別スレッドで実行する
            await asyncio.get_event_loop().run_in_executor(None, self._create_tables)
            logger.info(f"結果データベースを初期化しました: {self.db_path}")
        except Exception as e:
            logger.error(f"結果データベースの初期化中にエラーが発生しました: {e}", exc_info=True)
            raise

    def _connect(self) -> sqlite3.Connection:
        conn = sqlite3.connect(self.db_path)
        conn.row_factory = sqlite3.Row
        return conn

    def _create_tables(self):
        conn = self._connect()
        try:
            cursor = conn.cursor()

            # 明示公式の台帳
            cursor.execute('''
            CREATE TABLE IF NOT EXISTS ledgers (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                kind TEXT NOT NULL,
                alpha REAL NOT NULL,
                delta REAL NOT NULL,
                t REAL NOT NULL,
                residual REAL NOT NULL,
                budget REAL NOT NULL,
                balanced INTEGER NOT NULL,
                report TEXT NOT NULL,
                timestamp INTEGER NOT NULL
            )
            ''')

            # 上界・下界のレポート
            cursor.execute('''
            CREATE TABLE IF NOT EXISTS bound_reports (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                side TEXT NOT NULL,
                alpha REAL NOT NULL,
                t REAL NOT NULL,
                regime TEXT NOT NULL,
                bound_value REAL NOT NULL,
                actual REAL,
                slack REAL,
                report TEXT NOT NULL,
                timestamp INTEGER NOT NULL
            )
            ''')

            # 受け入れ検証の結果
            cursor.execute('''
            CREATE TABLE IF NOT EXISTS verifications (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                name TEXT NOT NULL,
                passed INTEGER NOT NULL,
                checked INTEGER NOT NULL,
                failures INTEGER NOT NULL,
                detail TEXT NOT NULL,
                timestamp INTEGER NOT NULL
            )
            ''')

            conn.commit()
            logger.debug("結果テーブルを作成しました")
        except Exception as e:
            logger.error(f"結果テーブル作成中にエラーが発生しました: {e}", exc_info=True)
            raise
        finally:
            conn.close()

    # --- 保存 ---

    async def save_ledger(self, ledger: Dict[str, Any]) -> int:
        return await asyncio.get_event_loop().run_in_executor(None, self._save_ledger_sqlite, ledger)

    def _save_ledger_sqlite(self, ledger: Dict[str, Any]) -> int:
        conn = self._connect()
        try:
            cursor = conn.execute(
                """
                INSERT INTO ledgers (kind, alpha, delta, t, residual, budget, balanced, report, timestamp)
                VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)
                """,
                (
                    ledger["kind"],
                    ledger["alpha"],
                    ledger["delta"],
                    ledger["t"],
                    ledger["residual"]["value"],
                    ledger["budget"],
                    int(bool(ledger["balanced"])),
                    json.dumps(ledger, sort_keys=True),
                    int(time.time()),
                ),
            )
            conn.commit()
            return int(cursor.lastrowid)
        except Exception as e:
            logger.error(f"台帳の保存中にエラーが発生しました: {e}", exc_info=True)
            raise
        finally:
            conn.close()

    async def save_bound_report(self, report: Dict[str, Any]) -> int:
        return await asyncio.get_event_loop().run_in_executor(None, self._save_bound_report_sqlite, report)

    def _save_bound_report_sqlite(self, report: Dict[str, Any]) -> int:
        conn = self._connect()
        try:
            cursor = conn.execute(
                """
                INSERT INTO bound_reports (side, alpha, t, regime, bound_value, actual, slack, report, timestamp)
                VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)
                """,
                (
                    report["side"],
                    report["alpha"],
                    report["t"],
                    report["regime"],
                    report["bound_value"],
                    report.get("actual"),
                    report.get("slack"),
                    json.dumps(report, sort_keys=True),
                    int(time.time()),
                ),
            )
            conn.commit()
            return int(cursor.lastrowid)
        except Exception as e:
            logger.error(f"界のレポートの保存中にエラーが発生しました: {e}", exc_info=True)
            raise
        finally:
            conn.close()

    async def save_verification(self, outcome: Dict[str, Any]) -> int:
        return await asyncio.get_event_loop().run_in_executor(None, self._save_verification_sqlite, outcome)

    def _save_verification_sqlite(self, outcome: Dict[str, Any]) -> int:
        conn = self._connect()
        try:
            cursor = conn.execute(
                """
                INSERT INTO verifications (name, passed, checked, failures, detail, timestamp)
                VALUES (?, ?, ?, ?, ?, ?)
                """,
                (
                    outcome["name"],
                    int(bool(outcome["passed"])),
                    outcome["checked"],
                    outcome["failures"],
                    json.dumps(outcome.get("detail", {}), sort_keys=True),
                    int(time.time()),
                ),
            )
            conn.commit()
            return int(cursor.lastrowid)
        except Exception as e:
            logger.error(f"検証結果の保存中にエラーが発生しました: {e}", exc_info=True)
            raise
        finally:
            conn.close()

    # --- 取得 ---

    async def get_ledgers(self, kind: Optional[str] = None, limit: int = 50) -> List[Dict[str, Any]]:
        return await asyncio.get_event_loop().run_in_executor(None, self._get_ledgers_sqlite, kind, limit)

    def _get_ledgers_sqlite(self, kind: Optional[str], limit: int) -> List[Dict[str, Any]]:
        query = "SELECT * FROM ledgers"
        params: List[Any] = []
        if kind:
            query += " WHERE kind = ?"
            params.append(kind)
        query += " ORDER BY id DESC LIMIT ?"
        params.append(limit)
        return self._fetch(query, params)

    async def get_bound_reports(self, side: Optional[str] = None, limit: int = 50) -> List[Dict[str, Any]]:
        return await asyncio.get_event_loop().run_in_executor(None, self._get_bound_reports_sqlite, side, limit)

    def _get_bound_reports_sqlite(self, side: Optional[str], limit: int) -> List[Dict[str, Any]]:
        query = "SELECT * FROM bound_reports"
        params: List[Any] = []
        if side:
            query += " WHERE side = ?"
            params.append(side)
        query += " ORDER BY id DESC LIMIT ?"
        params.append(limit)
        return self._fetch(query, params)

    async def get_verifications(self, failed_only: bool = False, limit: int = 50) -> List[Dict[str, Any]]:
        return await asyncio.get_event_loop().run_in_executor(
            None, self._get_verifications_sqlite, failed_only, limit
        )

    def _get_verifications_sqlite(self, failed_only: bool, limit: int) -> List[Dict[str, Any]]:
        query = "SELECT * FROM verifications"
        if failed_only:
            query += " WHERE passed = 0"
        query += " ORDER BY id DESC LIMIT ?"
        return self._fetch(query, [limit])

    def _fetch(self, query: str, params: List[Any]) -> List[Dict[str, Any]]:
        conn = self._connect()
        try:
            return [dict(row) for row in conn.execute(query, params).fetchall()]
        except Exception as e:
            logger.error(f"結果の取得中にエラーが発生しました: {e}", exc_info=True)
            raise
        finally:
            conn.close()

    async def cleanup(self):
        # 接続は操作ごとに閉じているので、ここでは記録のみ
        logger.debug(f"結果データベースの利用を終了しました: {self.db_path}")
