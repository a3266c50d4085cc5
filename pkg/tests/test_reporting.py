# tests/test_reporting.py
import io
import csv
import json
import math

import numpy as np

from src.reporting import emit, flatten, format_number, render, to_csv, to_json, to_table


def test_format_number():
    assert format_number(0.1) == "0.10000000000000001"
    assert float(format_number(math.pi)) == math.pi
    assert format_number(None) == ""
    assert format_number(True) == "true"
    assert format_number(float("-inf")) == "-inf"
    assert format_number(7) == "7"


def test_flatten_nested_terms():
    row = {"t": 100.0, "zero_side": {"value": 1.5, "error": 0.01}, "flags": ["a", "b"]}
    assert flatten(row) == {"t": 100.0, "zero_side.value": 1.5, "zero_side.error": 0.01, "flags": "a;b"}


def test_json_handles_numpy_scalars():
    payload = [{"value": np.float64(2.5), "count": np.int64(3), "pair": (1, 2)}]
    assert json.loads(to_json(payload)) == [{"count": 3, "pair": [1, 2], "value": 2.5}]


def test_csv_keeps_full_precision_and_union_of_columns():
    rows = [{"x": 1.0 / 3.0}, {"x": 2.0, "extra": "tag"}]
    parsed = list(csv.reader(io.StringIO(to_csv(rows))))
    assert parsed[0] == ["x", "extra"]
    assert float(parsed[1][0]) == 1.0 / 3.0
    assert parsed[1][1] == ""
    assert parsed[2] == ["2", "tag"]


def test_csv_with_fixed_columns():
    text = to_csv([{"a": 1, "b": 2, "c": 3}], columns=["c", "a"])
    assert text.splitlines() == ["c,a", "3,1"]


def test_render_dispatch():
    rows = [{"quantity": "value", "value": 2.0}]
    assert json.loads(render(rows, "json")) == rows
    assert render(rows, "csv").splitlines()[0] == "quantity,value"


def test_table_output():
    text = to_table([{"alpha": 0.75, "bound": 1.25}])
    assert "alpha" in text and "1.25" in text


def test_emit_to_stream_and_file(tmp_path):
    stream = io.StringIO()
    emit("hello", stream=stream)
    assert stream.getvalue() == "hello\n"

    path = tmp_path / "report.json"
    emit("[]\n", str(path))
    assert path.read_text(encoding="utf-8") == "[]\n"


def test_emit_to_stdout_keeps_single_newline(capsys):
    emit(to_csv([{"x": 1}]))
    emit("tail")
    assert capsys.readouterr().out == "x\n1\ntail\n"
