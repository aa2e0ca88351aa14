import json
import math

import pytest

from rdream.reporting import (
    curve_points,
    emit_report,
    load_report,
    parse_csv,
    parse_json,
    record_to_csv,
    record_to_json,
    table_to_csv,
    table_to_json,
)
from rdream.simulation import COLUMNS, PowerRow, PowerTable


def _row(**kw):
    base = dict(
        family="H11", error="normal", a=0.0, n=100, method="opg", rate=0.048, reps=500, seed_base=7,
        p=8, rho=0.1, contamination="add(5,0.1)", alpha=0.05, rejections=24, failures=0, valid=True,
    )
    base.update(kw)
    return PowerRow(**base)


@pytest.fixture
def table():
    rows = [_row(), _row(a=0.2, rate=1 / 3, method="gwz"), _row(rate=float("nan"), valid=False, failures=500)]
    return PowerTable(rows, {"reps": 500, "methods": ["opg", "gwz"]})


def _same(a, b):
    assert a.config == b.config
    assert len(a.rows) == len(b.rows)
    for r, s in zip(a.rows, b.rows):
        for c in COLUMNS:
            x, y = getattr(r, c), getattr(s, c)
            assert (math.isnan(x) and math.isnan(y)) if isinstance(x, float) and math.isnan(x) else x == y
            assert type(x) is type(y)


class TestPowerTable:
    def test_csv_round_trip(self, table):
        _same(parse_csv(table_to_csv(table)), table)

    def test_json_round_trip(self, table):
        _same(parse_json(table_to_json(table)), table)

    def test_csv_layout(self, table):
        lines = table_to_csv(table).splitlines()
        assert lines[0] == "# rdream power table"
        assert json.loads(lines[1][len("# config: "):]) == table.config
        assert lines[2] == ",".join(COLUMNS)
        assert lines[3] == 'H11,normal,0.0,100,opg,0.048,500,7,8,0.1,"add(5,0.1)",0.05,24,0,true'

    def test_empty_grid(self):
        text = table_to_csv(PowerTable([], {}))
        assert text.splitlines()[-1] == ",".join(COLUMNS)
        assert parse_csv(text).rows == []

    def test_single_cell(self):
        assert len(table_to_csv(PowerTable([_row()], {})).splitlines()) == 4

    def test_bad_header(self):
        with pytest.raises(ValueError):
            parse_csv("family,rate\nH11,0.1\n")

    @pytest.mark.parametrize("fmt", ["csv", "json"])
    def test_file_round_trip(self, table, tmp_path, fmt):
        path = emit_report(table, fmt, tmp_path / f"out.{fmt}")
        _same(load_report(path), table)

    def test_write_error_names_path(self, table, tmp_path):
        bad = tmp_path / "missing" / "out.csv"
        with pytest.raises(OSError, match="missing"):
            emit_report(table, "csv", bad)
        with pytest.raises(ValueError):
            emit_report(table, "xml", tmp_path / "x")

    def test_curve_points(self, table):
        pts = curve_points(table)
        assert pts[1] == (0.2, 1 / 3, "H11/n=100/p=8/normal/gwz")
        assert [p[0] for p in curve_points(table, "n")] == [100, 100, 100]


class TestRecords:
    def test_csv(self):
        text = record_to_csv({"p_value": 0.5, "b_hat": [1.0, 0.0], "reject": False, "x": None}, {"a": 1})
        lines = text.splitlines()
        assert lines[2] == "key,value"
        assert lines[3] == "p_value,0.5"
        assert lines[4] == 'b_hat,"[1.0, 0.0]"'
        assert lines[5] == "reject,false"
        assert lines[6] == "x,"

    def test_json(self):
        doc = json.loads(record_to_json({"p_value": None, "s": float("inf")}, {"a": 1}))
        assert doc == {"config": {"a": 1}, "report": {"p_value": None, "s": "inf"}}
