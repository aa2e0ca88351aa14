"""CSV/JSON serialization of power tables and test reports.

Power-table CSV layout::

    # rdream power table
    # config: {...resolved configuration as JSON...}
    family,error,a,n,method,rate,reps,seed_base,p,rho,contamination,alpha,rejections,failures,valid
    H11,normal,0.0,100,opg,0.048,500,7,8,0.1,"add(5,0.1)",0.05,24,0,true

Floats are written with ``repr`` so parsing reproduces them exactly. The
JSON form is ``{"config": ..., "columns": [...], "rows": [[...], ...]}``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from .simulation import COLUMNS, PowerRow, PowerTable

_TYPES = {name: f.type for name, f in PowerRow.__dataclass_fields__.items()}


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(name, text):
    kind = _TYPES[name]
    if kind == "bool":
        if text not in ("true", "false"):
            raise ValueError(f"bad boolean {text!r} in column {name}")
        return text == "true"
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    return text


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def table_to_csv(table: PowerTable) -> str:
    buf = io.StringIO()
    buf.write("# rdream power table\n")
    buf.write("# config: " + json.dumps(table.config, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in table.rows:
        writer.writerow([_fmt(getattr(row, c)) for c in COLUMNS])
    return buf.getvalue()


def table_to_json(table: PowerTable) -> str:
    rows = [[_json_value(getattr(r, c)) for c in COLUMNS] for r in table.rows]
    doc = {"config": table.config, "columns": list(COLUMNS), "rows": rows}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def emit_report(table: PowerTable, fmt: str, path) -> Path:
    path = Path(path)
    text = table_to_csv(table) if fmt == "csv" else table_to_json(table) if fmt == "json" else None
    if text is None:
        raise ValueError(f"unknown report format {fmt!r}")
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path


def parse_csv(text: str) -> PowerTable:
    config = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# config: "):
            config = json.loads(line[len("# config: "):])
        elif not line.startswith("#"):
            body.append(line)
    reader = csv.reader(body)
    header = next(reader, None)
    if header is None or tuple(header) != COLUMNS:
        raise ValueError(f"unexpected header {header}")
    rows = [PowerRow(**{c: _parse(c, v) for c, v in zip(COLUMNS, rec)}) for rec in reader]
    return PowerTable(rows, config)


def parse_json(text: str) -> PowerTable:
    doc = json.loads(text)
    if tuple(doc["columns"]) != COLUMNS:
        raise ValueError(f"unexpected columns {doc['columns']}")
    rows = []
    for rec in doc["rows"]:
        values = {}
        for c, v in zip(COLUMNS, rec):
            values[c] = float(v) if _TYPES[c] == "float" else v
        rows.append(PowerRow(**values))
    return PowerTable(rows, doc["config"])


def load_report(path) -> PowerTable:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read report {path}: {exc}") from exc
    return parse_json(text) if path.suffix == ".json" else parse_csv(text)


def curve_points(table: PowerTable, x: str = "a") -> list:
    """``(x, rate, series)`` triples for plotting power or size curves."""
    out = []
    for r in table.rows:
        series = f"{r.family}/n={r.n}/p={r.p}/{r.error}/{r.method}"
        out.append((getattr(r, x), r.rate, series))
    return out


def record_to_csv(record: dict, config: dict) -> str:
    buf = io.StringIO()
    buf.write("# rdream test report\n")
    buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "value"])
    for key, value in record.items():
        if isinstance(value, (list, dict)):
            value = json.dumps(value)
        elif value is None:
            value = ""
        writer.writerow([key, _fmt(value)])
    return buf.getvalue()


def record_to_json(record: dict, config: dict) -> str:
    doc = {"config": config, "report": {k: _json_value(v) for k, v in record.items()}}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
