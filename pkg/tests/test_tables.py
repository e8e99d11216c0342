import json
import math

import numpy as np
import pytest

from scripts.common.errors import OutputExistsError
from scripts.common.tables import emit_tables, format_cell, parse_cell, read_csv, write_csv


class TestCells:
    @pytest.mark.parametrize("value, text", [
        (None, ""),
        (True, "true"),
        (3, "3"),
        (0.1, "0.10000000000000001"),
        (math.inf, "inf"),
        (-math.inf, "-inf"),
        (math.nan, "nan"),
        (np.float64(0.5), "0.5"),
        (np.int64(7), "7"),
        ("verdict", "verdict"),
    ])
    def test_format(self, value, text):
        assert format_cell(value) == text

    def test_floats_survive(self):
        for value in (1.0 / 3.0, 1e-300, -2.5e17):
            assert parse_cell(format_cell(value)) == value


class TestFiles:
    def test_csv_read_back(self, tmp_path):
        rows = [{"eps": 0.1, "hits": 3, "ok": True, "gap": None}, {"eps": 1.0 / 7.0, "hits": 0, "ok": False}]
        path = write_csv(tmp_path / "t.csv", ["eps", "hits", "ok", "gap"], rows)
        columns, back = read_csv(path)
        assert columns == ["eps", "hits", "ok", "gap"]
        assert back[0] == {"eps": 0.1, "hits": 3, "ok": True, "gap": None}
        assert back[1]["eps"] == 1.0 / 7.0

    def test_refuses_overwrite(self, tmp_path):
        write_csv(tmp_path / "t.csv", ["a"], [{"a": 1}])
        with pytest.raises(OutputExistsError):
            write_csv(tmp_path / "t.csv", ["a"], [{"a": 2}], force=False)

    def test_emit_creates_directories_and_json(self, tmp_path):
        prefix = str(tmp_path / "nested" / "run")
        paths = emit_tables(prefix, [("rate", ["action"], [{"action": np.float64(0.5)}])], as_json=True)
        assert [p.name for p in paths] == ["run_rate.csv", "run_rate.json"]
        assert json.loads(paths[1].read_text()) == [{"action": 0.5}]

    def test_emit_checks_every_target_first(self, tmp_path):
        prefix = str(tmp_path / "run")
        emit_tables(prefix, [("b", ["x"], [{"x": 1}])])
        with pytest.raises(OutputExistsError):
            emit_tables(prefix, [("a", ["x"], [{"x": 1}]), ("b", ["x"], [{"x": 2}])])
        assert not (tmp_path / "run_a.csv").exists()
        emit_tables(prefix, [("a", ["x"], [{"x": 1}]), ("b", ["x"], [{"x": 2}])], force=True)
        assert read_csv(tmp_path / "run_b.csv")[1] == [{"x": 2}]
