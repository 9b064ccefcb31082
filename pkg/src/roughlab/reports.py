"""Report serialization: flat CSV and single-document JSON, bit-stable.

CSV layout: one header naming every column; ``kind`` discriminates metadata,
data and verdict rows.  Verdict rows reuse the matching data columns for
their keys and fill status/exponent/confidence.  Numbers are rendered with
17 significant digits so parse(serialize(r)) == r field-for-field; fields
are numeric or identifier-like by construction, so no quoting is needed.
"""

from __future__ import annotations

import json
import math
from typing import Any

from .experiments import SCHEMA_VERSION, ScanReport

VERDICT_COLUMNS = ("status", "exponent", "confidence")


def _render(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.17g}"
    return str(value)


def _parse_scalar(text: str):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def serialize_report(report: ScanReport, fmt: str) -> bytes:
    if fmt == "csv":
        return _to_csv(report)
    if fmt == "json":
        return _to_json(report)
    raise ValueError(f"unknown format {fmt!r}")


def parse_report(data: bytes, fmt: str) -> ScanReport:
    if fmt == "csv":
        return _from_csv(data)
    if fmt == "json":
        return _from_json(data)
    raise ValueError(f"unknown format {fmt!r}")


def _to_csv(report: ScanReport) -> bytes:
    header = ["kind", "meta_key", "meta_value", *report.columns, *VERDICT_COLUMNS]
    width = len(header)
    lines = [",".join(header)]

    def emit(cells: dict[str, Any]) -> None:
        row = [_render(cells.get(name)) for name in header]
        assert len(row) == width
        lines.append(",".join(row))

    emit({"kind": "meta", "meta_key": "report_target", "meta_value": report.target})
    for key in report.metadata:
        emit({"kind": "meta", "meta_key": key, "meta_value": report.metadata[key]})
    for row in report.rows:
        cells = {"kind": "data"}
        cells.update(dict(zip(report.columns, row)))
        emit(cells)
    for verdict in report.verdicts:
        cells: dict[str, Any] = {"kind": "verdict"}
        cells.update(verdict)
        emit(cells)
    return ("\n".join(lines) + "\n").encode("utf-8")


def _from_csv(data: bytes) -> ScanReport:
    lines = data.decode("utf-8").strip("\n").split("\n")
    header = lines[0].split(",")
    columns = tuple(header[3 : len(header) - len(VERDICT_COLUMNS)])
    metadata: dict[str, Any] = {}
    rows: list[tuple] = []
    verdicts: list[dict] = []
    target = ""
    for line in lines[1:]:
        cells = line.split(",")
        record = dict(zip(header, cells))
        kind = record["kind"]
        if kind == "meta":
            key, value = record["meta_key"], _parse_scalar(record["meta_value"])
            if key == "report_target":
                target = value
            else:
                metadata[key] = value
        elif kind == "data":
            rows.append(tuple(_parse_scalar(record[c]) for c in columns))
        elif kind == "verdict":
            entry = {
                c: _parse_scalar(record[c])
                for c in columns
                if record[c] != ""
            }
            for c in VERDICT_COLUMNS:
                entry[c] = _parse_scalar(record[c])
            verdicts.append(entry)
    return ScanReport(target=target, metadata=metadata, columns=columns, rows=rows, verdicts=verdicts)


def _to_json(report: ScanReport) -> bytes:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "target": report.target,
        "metadata": report.metadata,
        "columns": list(report.columns),
        "rows": [list(r) for r in report.rows],
        "verdicts": report.verdicts,
    }
    return (json.dumps(doc, sort_keys=True, indent=1) + "\n").encode("utf-8")


def _from_json(data: bytes) -> ScanReport:
    doc = json.loads(data.decode("utf-8"))
    return ScanReport(
        target=doc["target"],
        metadata=doc["metadata"],
        columns=tuple(doc["columns"]),
        rows=[tuple(r) for r in doc["rows"]],
        verdicts=doc["verdicts"],
    )


def write_report(report: ScanReport, path: str, fmt: str) -> None:
    payload = serialize_report(report, fmt)
    with open(path, "wb") as handle:
        handle.write(payload)
