# tests/test_data_management.py
import json
import asyncio

import view_results
from src.data_management import ResultStore


def _ledger(kind="minorant", residual=1e-4, balanced=True):
    return {
        "kind": kind,
        "alpha": 0.75,
        "delta": 1.0,
        "t": 100.0,
        "residual": {"value": residual, "error": 0.01},
        "budget": 0.01,
        "balanced": balanced,
        "zero_side": {"value": 12.5, "error": 0.001},
    }


def _bound(side="upper", slack=0.5):
    return {
        "side": side,
        "alpha": 0.75,
        "t": 1e4,
        "regime": "NearHalf",
        "bound_value": 3.2,
        "actual": 3.2 - slack,
        "slack": slack,
        "flags": [],
    }


def test_tables_created(store):
    rows = store._fetch("SELECT name FROM sqlite_master WHERE type = 'table' ORDER BY name", [])
    names = {row["name"] for row in rows}
    assert {"ledgers", "bound_reports", "verifications"} <= names


def test_ledger_roundtrip(store):
    async def scenario():
        first = await store.save_ledger(_ledger("minorant"))
        second = await store.save_ledger(_ledger("majorant", residual=0.5, balanced=False))
        return first, second, await store.get_ledgers(), await store.get_ledgers("majorant")

    first, second, everything, majorants = asyncio.run(scenario())
    assert second > first
    assert [row["id"] for row in everything] == [second, first]
    assert len(majorants) == 1
    assert majorants[0]["balanced"] == 0
    assert majorants[0]["residual"] == 0.5
    assert json.loads(majorants[0]["report"])["zero_side"]["value"] == 12.5


def test_bound_reports_filter_by_side(store):
    async def scenario():
        await store.save_bound_report(_bound("upper"))
        await store.save_bound_report(_bound("lower", slack=-0.1))
        return await store.get_bound_reports("lower")

    rows = asyncio.run(scenario())
    assert len(rows) == 1
    assert rows[0]["slack"] == -0.1
    assert rows[0]["regime"] == "NearHalf"


def test_bound_report_without_actual(store):
    report = dict(_bound(), actual=None, slack=None)
    asyncio.run(store.save_bound_report(report))
    row = asyncio.run(store.get_bound_reports())[0]
    assert row["actual"] is None and row["slack"] is None


def test_verifications_failed_only(store):
    async def scenario():
        await store.save_verification({"name": "lemmas", "passed": True, "checked": 10, "failures": 0})
        await store.save_verification(
            {"name": "littlewood", "passed": False, "checked": 10, "failures": 1, "detail": {"examples": [{"t": 1e4}]}}
        )
        return await store.get_verifications(failed_only=True), await store.get_verifications(limit=1)

    failed, latest = asyncio.run(scenario())
    assert [row["name"] for row in failed] == ["littlewood"]
    assert json.loads(failed[0]["detail"]) == {"examples": [{"t": 1e4}]}
    assert len(latest) == 1


def test_explicit_db_path(app_config, tmp_path):
    path = tmp_path / "nested" / "other.db"
    other = ResultStore(app_config, str(path))
    asyncio.run(other.initialize())
    assert path.exists()
    asyncio.run(other.cleanup())


def test_viewer_renders_stored_rows(store, capsys):
    ledger = dict(_ledger(), prime_side={"value": 12.4, "error": 0.001})

    async def scenario():
        await store.save_ledger(ledger)
        await store.save_bound_report(_bound("lower", slack=-0.1))
        await store.save_bound_report(dict(_bound("upper"), actual=None, slack=None))
        await store.save_verification({"name": "lemmas", "passed": False, "checked": 10, "failures": 2})

    asyncio.run(scenario())
    conn = view_results.connect_to_db(store.db_path)
    try:
        view_results.show_ledgers(conn, kind="minorant")
        view_results.show_bounds(conn, negative_only=True)
        view_results.show_verifications(conn, failed_only=True)
        view_results.show_bounds(conn, side="upper")
    finally:
        conn.close()

    out = capsys.readouterr().out
    assert out.count("+---") >= 4
    assert "12.4" in out and "NG" not in out
    assert "-0.1" in out and "N/A" in out
    assert "FAIL" in out and "lemmas" in out
