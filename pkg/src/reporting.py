# src/reporting.py
"""レポートの JSON / CSV / 表形式への書き出し"""
import io
import csv
import json
import math
import logging
import sys
from typing import Any, Dict, Iterable, List, Optional, Sequence

from tabulate import tabulate

logger = logging.getLogger("extremal_zeta.reporting")


def format_number(value: Any) -> str:
    """浮動小数点数を 17 桁で表す（それ以外はそのまま文字列化）"""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.17g}"
    return str(value)


def _plain(value: Any) -> Any:
    """numpy のスカラーや tuple を JSON に載る型に直す"""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "item") and callable(value.item):
        return value.item()
    return value


def to_json(payload: Any) -> str:
    return json.dumps(_plain(payload), indent=2, sort_keys=True, ensure_ascii=False, allow_nan=True)


def flatten(row: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    """入れ子の辞書を 'zero_side.value' のような列名に平らにする"""
    flat: Dict[str, Any] = {}
    for key, value in row.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(flatten(value, f"{name}."))
        elif isinstance(value, (list, tuple)):
            flat[name] = ";".join(format_number(v) for v in value)
        else:
            flat[name] = value
    return flat


def to_csv(rows: Iterable[Dict[str, Any]], columns: Optional[Sequence[str]] = None) -> str:
    flat_rows = [flatten(_plain(row)) for row in rows]
    if columns is None:
        columns = []
        for row in flat_rows:
            for key in row:
                if key not in columns:
                    columns.append(key)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in flat_rows:
        writer.writerow([format_number(row.get(column)) for column in columns])
    return buffer.getvalue()


def to_table(rows: List[Dict[str, Any]], columns: Optional[Sequence[str]] = None) -> str:
    flat_rows = [flatten(_plain(row)) for row in rows]
    if columns is not None:
        flat_rows = [{column: row.get(column) for column in columns} for row in flat_rows]
    return tabulate(flat_rows, headers="keys", tablefmt="grid", floatfmt=".10g")


def emit(text: str, out_path: Optional[str] = None, stream=None) -> None:
    """out_path があればファイルへ、なければ stream（既定は標準出力）へ書く"""
    if out_path:
        with open(out_path, "w", encoding="utf-8") as f:
            f.write(text if text.endswith("\n") else text + "\n")
        logger.info(f"レポートを書き出しました: {out_path}")
        return
    if stream is None:
        stream = sys.stdout
    stream.write(text if text.endswith("\n") else text + "\n")


def render(rows: List[Dict[str, Any]], output: str, columns: Optional[Sequence[str]] = None) -> str:
    if output == "csv":
        return to_csv(rows, columns)
    return to_json(rows)
