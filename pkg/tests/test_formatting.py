import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from otto_lab.formatting import csv_text, dumps, format_float, read_csv, write_csv, write_json


class TestFormatFloat:
    def test_fixed_width(self):
        assert format_float(1.0) == "1.0000000000000000e+00"
        assert format_float(-0.1) == "-1.0000000000000001e-01"

    def test_non_finite(self):
        assert format_float(np.nan) == "nan"
        assert format_float(np.inf) == "inf"
        assert format_float(-np.inf) == "-inf"

    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_round_trip(self, x):
        assert float(format_float(x)) == x


class TestJson:
    def test_valid_json_and_order(self):
        obj = {"b": 1, "a": [0.5, True, None], "c": {"x": np.float64(2.0), "y": np.arange(2)}}
        text = dumps(obj)
        back = json.loads(text)
        assert list(back) == ["b", "a", "c"]
        assert back["a"] == [0.5, True, None]
        assert back["c"]["y"] == [0, 1]
        assert text.endswith("\n")

    def test_non_finite_as_strings(self):
        assert json.loads(dumps({"v": float("inf")}))["v"] == "inf"

    def test_empty_containers(self):
        assert dumps({"a": [], "b": {}}) == '{\n  "a": [],\n  "b": {}\n}\n'

    def test_rejects_unknown_types(self):
        with pytest.raises(TypeError):
            dumps({"a": object()})

    def test_write_json(self, tmp_path):
        write_json(tmp_path / "r.json", {"x": 0.1})
        assert json.loads((tmp_path / "r.json").read_text())["x"] == 0.1


class TestCsv:
    def test_round_trip(self, tmp_path):
        data = np.array([[0.0, 1.5], [np.pi, -2e-300]])
        write_csv(tmp_path / "a.csv", ["t", "v"], data)
        names, back = read_csv(tmp_path / "a.csv")
        assert names == ["t", "v"]
        np.testing.assert_array_equal(back, data)

    def test_single_row(self, tmp_path):
        write_csv(tmp_path / "b.csv", ["a", "b", "c"], [1.0, 2.0, 3.0])
        _, back = read_csv(tmp_path / "b.csv")
        assert back.shape == (1, 3)

    def test_text(self):
        assert csv_text(["x"], [[1.0]]) == "x\n1.0000000000000000e+00\n"
