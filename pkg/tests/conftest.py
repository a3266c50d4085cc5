# tests/conftest.py
import os
import asyncio

import pytest

from src.arithmetic_data import generate_zero_table, sieve_von_mangoldt, write_zero_table
from src.config import AppConfig, QuadratureSpec
from src.data_management import ResultStore

# 明示公式の行列 (t ≤ 500) と恒等式 (t ≤ 1000) を覆う高さ
ZERO_HEIGHT = 2100.0


@pytest.fixture(scope="session")
def zeros():
    return generate_zero_table(ZERO_HEIGHT)


@pytest.fixture(scope="session")
def table():
    return sieve_von_mangoldt(600)


@pytest.fixture
def spec():
    return QuadratureSpec()


@pytest.fixture
def app_config(tmp_path, monkeypatch):
    monkeypatch.setenv("EXTREMAL_ZETA_DATA", str(tmp_path))
    monkeypatch.setenv("EXTREMAL_ZETA_DB", str(tmp_path / "results.db"))
    monkeypatch.setenv("ZERO_FILE", str(tmp_path / "zeros_low.txt"))
    monkeypatch.setenv("SIEVE_CACHE", str(tmp_path / "von_mangoldt.csv"))
    monkeypatch.setenv("LOG_DIR", str(tmp_path / "logs"))
    return AppConfig()


@pytest.fixture
def store(app_config):
    result_store = ResultStore(app_config)
    asyncio.run(result_store.initialize())
    return result_store


@pytest.fixture
def zero_file(tmp_path, zeros):
    """高さ 600 までの零点ファイル"""
    path = os.path.join(tmp_path, "zeros_600.txt")
    write_zero_table(zeros.truncated(600.0), path)
    return path
