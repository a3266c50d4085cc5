# tests/test_commands.py
import csv
import io
import json
import asyncio
import os
import sqlite3

import pytest

from main import main
from src.commands import BOUND_COLUMNS, COMMANDS


def run_cli(*argv):
    return asyncio.run(main(list(argv)))


def read_json(capsys):
    return json.loads(capsys.readouterr().out)


class TestEval:
    def test_node_value(self, app_config, capsys):
        assert run_cli("eval", "--kind", "minorant", "--alpha", "1", "--delta", "1", "--x", "0.5") == 0
        rows = read_json(capsys)
        assert rows[0]["quantity"] == "value"
        assert rows[0]["value"] == pytest.approx(2.1400662, abs=1e-7)

    def test_transform_at_zero(self, app_config, capsys):
        assert run_cli("eval", "--ft", "--xi", "0", "--alpha", "1", "--delta", "1", "--kind", "minorant") == 0
        assert read_json(capsys)[0]["value"] == pytest.approx(9.3401724, abs=1e-7)

    def test_l1_distance(self, app_config, capsys):
        assert run_cli("eval", "--l1", "--alpha", "1", "--delta", "1", "--kind", "majorant") == 0
        row = read_json(capsys)[0]
        assert row["value"] == pytest.approx(0.0883439, abs=1e-7)
        assert row["kind"] == "majorant"

    def test_csv_output(self, app_config, capsys):
        assert run_cli("eval", "--alpha", "0.75", "--delta", "1", "--x", "0", "1", "--output", "csv") == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert [row["x"] for row in rows] == ["0", "1"]

    def test_missing_target_is_config_error(self, app_config):
        assert run_cli("eval", "--alpha", "0.75", "--delta", "1") == 2


class TestExplicitFormula:
    def test_reference_point(self, app_config, zero_file, capsys):
        code = run_cli("explicit-formula", "--alpha", "1", "--delta", "1", "--t", "100", "--zeros", zero_file)
        assert code == 0
        rows = read_json(capsys)
        assert rows[0]["balanced"] is True
        with sqlite3.connect(app_config.db_path) as conn:
            assert conn.execute("SELECT COUNT(*) FROM ledgers").fetchone()[0] == 1

    def test_majorant(self, app_config, zero_file, capsys):
        code = run_cli(
            "explicit-formula", "--alpha", "0.75", "--delta", "0.5", "--kind", "majorant",
            "--t", "250", "--zeros", zero_file, "--no-store",
        )
        assert code == 0
        assert read_json(capsys)[0]["kind"] == "majorant"

    def test_insufficient_coverage(self, app_config, zero_file):
        code = run_cli("explicit-formula", "--alpha", "1", "--delta", "1", "--t", "400", "--zeros", zero_file)
        assert code == 2

    def test_missing_zero_file(self, app_config, tmp_path):
        code = run_cli("explicit-formula", "--alpha", "1", "--delta", "1", "--t", "100",
                       "--zeros", str(tmp_path / "missing.txt"))
        assert code == 2


class TestBounds:
    def test_alpha_out_of_range(self, app_config):
        assert run_cli("bounds", "--alpha", "0.5", "--t", "100") == 2

    def test_check_passes(self, app_config, zero_file, capsys):
        code = run_cli("bounds", "--alpha", "0.75", "--t", "100", "--with-actual", "--check", "--zeros", zero_file)
        assert code == 0
        rows = read_json(capsys)
        assert [row["side"] for row in rows if "side" in row] == ["upper", "lower"]
        assert all(row["holds"] for row in rows if row.get("quantity") == "check")

    def test_littlewood(self, app_config, capsys):
        assert run_cli("bounds", "--littlewood", "--t", "1e4", "--with-actual", "--no-store") == 0
        row = read_json(capsys)[0]
        assert row["upper_slack"] > 0 and row["lower_slack"] > 0

    def test_general_delta(self, app_config, capsys):
        assert run_cli("bounds", "--alpha", "0.8", "--delta", "2", "--t", "1e6", "--no-store") == 0
        rows = read_json(capsys)
        assert [(row["side"], row["delta_used"]) for row in rows] == [("upper", 2.0), ("lower", 2.0)]

    def test_csv_columns(self, app_config, capsys):
        assert run_cli("bounds", "--alpha", "0.75", "--t", "1e10", "--output", "csv") == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == ",".join(BOUND_COLUMNS)
        assert len(lines) == 3
        with sqlite3.connect(app_config.db_path) as conn:
            assert conn.execute("SELECT COUNT(*) FROM bound_reports").fetchone()[0] == 2


class TestDataCommands:
    def test_sieve(self, app_config, tmp_path, capsys):
        path = str(tmp_path / "cache.csv")
        assert run_cli("sieve", "--limit", "100", "--out", path) == 0
        row = read_json(capsys)[0]
        assert row["limit"] == 100
        assert row["prime_powers"] == 35
        assert row["cache"] == path

    def test_zeros(self, app_config, tmp_path, capsys):
        path = str(tmp_path / "zeros_40.txt")
        assert run_cli("zeros", "--height", "40", "--out", path) == 0
        row = read_json(capsys)[0]
        assert row["count"] == 6
        assert row["first"] == pytest.approx(14.134725141734693, abs=1e-10)

    def test_zeros_height_too_small(self, app_config):
        assert run_cli("zeros", "--height", "10") == 2


class TestGeneratedZeros:
    def test_explicit_formula_without_zero_file(self, app_config, capsys):
        code = run_cli("explicit-formula", "--alpha", "1", "--delta", "1", "--t", "60", "--no-store")
        assert code == 0
        assert read_json(capsys)[0]["balanced"] is True
        assert os.path.exists(os.path.join(app_config.data_dir, "zeros_gen_120.txt"))

    def test_numeric_library_error_maps_to_exit_three(self, app_config, monkeypatch):
        async def broken(run, config):
            raise ValueError("rtol too small")

        monkeypatch.setitem(COMMANDS, "sieve", broken)
        assert run_cli("sieve", "--limit", "100") == 3


class TestDeterminism:
    @pytest.mark.parametrize("argv", [
        ("eval", "--alpha", "0.75", "--delta", "1", "--x", "0", "0.5", "--ft", "--xi", "0.3", "--l1"),
        ("bounds", "--alpha", "0.75", "--t", "1e4", "1e40", "--with-actual", "--no-store", "--output", "csv"),
        ("bounds", "--littlewood", "--t", "1e4", "--no-store"),
    ])
    def test_same_arguments_same_bytes(self, app_config, capsys, argv):
        assert run_cli(*argv) == 0
        first = capsys.readouterr().out
        assert run_cli(*argv) == 0
        assert capsys.readouterr().out == first
        assert first


def test_zero_relative_tolerance_from_cli(app_config, capsys):
    code = run_cli("eval", "--alpha", "1", "--delta", "1", "--kind", "minorant", "--x", "0.5", "--rel-tol", "0")
    assert code == 0
    assert read_json(capsys)[0]["value"] == pytest.approx(2.1400662, abs=1e-7)
