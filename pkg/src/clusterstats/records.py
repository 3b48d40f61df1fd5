"""Shift-level CSV records and their aggregation into frequency datasets.

CSV layout: UTF-8, comma separated, header row. ``events`` is required,
``exposure`` is optional (default 1 per record) and ``shift_id`` is an
optional identifier. Every other column is a categorical factor.
"""
import csv
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import DomainError, ParseError
from .glm import DatasetRow, FrequencyDataset

__all__ = ["ShiftRecord", "read_records", "aggregate", "ingest", "dataset_to_dict", "dataset_from_dict"]

EVENTS = "events"
EXPOSURE = "exposure"
SHIFT_ID = "shift_id"
RESERVED = (EVENTS, EXPOSURE, SHIFT_ID)


@dataclass(frozen=True)
class ShiftRecord:
    shift_id: str | None
    factors: dict
    exposure: float
    events: int


def _parse_events(text, line):
    try:
        value = int(text)
    except (TypeError, ValueError):
        raise ParseError(f"events value {text!r} is not an integer", line) from None
    if value < 0:
        raise ParseError(f"events value {value} is negative", line)
    return value


def _parse_exposure(text, line):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise ParseError(f"exposure value {text!r} is not a number", line) from None
    if not value > 0 or value == float("inf"):
        raise ParseError(f"exposure must be positive and finite, got {text!r}", line)
    return value


def read_records(path, factors=None):
    """Parse shift records, checking every declared column is present on every row."""
    path = Path(path)
    try:
        handle = path.open(newline="", encoding="utf-8-sig")
    except OSError as exc:
        raise ParseError(f"cannot open {path}: {exc.strerror}") from None
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or not any(h.strip() for h in header):
            raise ParseError(f"{path} is empty", 1)
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            raise ParseError("duplicate column names in header", 1)
        if EVENTS not in header:
            raise ParseError(f"missing required column {EVENTS!r}", 1)
        if factors is None:
            factors = [h for h in header if h not in RESERVED]
        else:
            factors = list(factors)
            for name in factors:
                if name not in header:
                    raise ParseError(f"missing factor column {name!r}", 1)
        records = []
        for fields in reader:
            line = reader.line_num
            if not fields or all(not f.strip() for f in fields):
                continue
            if len(fields) != len(header):
                raise ParseError(f"expected {len(header)} fields, found {len(fields)}", line)
            row = dict(zip(header, (f.strip() for f in fields)))
            levels = {}
            for name in factors:
                if row[name] == "":
                    raise ParseError(f"empty value in factor column {name!r}", line)
                levels[name] = row[name]
            exposure = _parse_exposure(row[EXPOSURE], line) if EXPOSURE in row else 1.0
            records.append(ShiftRecord(row.get(SHIFT_ID), levels, exposure, _parse_events(row[EVENTS], line)))
    if not records:
        raise ParseError(f"{path} has a header but no data rows", 2)
    return factors, records


def aggregate(factors, records):
    """Sum exposure and events per factor-level tuple; rows sorted lexicographically."""
    totals = {}
    for rec in records:
        key = tuple(rec.factors[name] for name in factors)
        exposure, events = totals.get(key, (0.0, 0))
        totals[key] = (exposure + rec.exposure, events + rec.events)
    rows = [DatasetRow(key, exp, ev) for key, (exp, ev) in sorted(totals.items())]
    return FrequencyDataset(tuple(factors), rows)


def dataset_to_dict(data):
    return {
        "factors": list(data.factors),
        "rows": [
            {"levels": dict(zip(data.factors, r.levels)), "exposure": r.exposure, "events": r.events}
            for r in data.rows
        ],
    }


def dataset_from_dict(payload):
    try:
        factors = list(payload["factors"])
        rows = [
            DatasetRow(tuple(str(r["levels"][f]) for f in factors), float(r["exposure"]), int(r["events"]))
            for r in payload["rows"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed tabulated dataset: {exc}") from None
    try:
        return FrequencyDataset(tuple(factors), sorted(rows, key=lambda r: r.levels))
    except DomainError as exc:
        raise ParseError(str(exc)) from None


def ingest(path, factors=None):
    """Load a CSV of shift records (or a ``tabulate --json`` report) as a FrequencyDataset."""
    path = Path(path)
    try:
        head = path.read_text(encoding="utf-8-sig").lstrip()[:1]
    except OSError as exc:
        raise ParseError(f"cannot open {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise ParseError(f"{path} is not UTF-8 text") from None
    if head == "{":
        try:
            doc = json.loads(path.read_text(encoding="utf-8-sig"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno) from None
        payload = doc.get("results", doc) if isinstance(doc, dict) else doc
        data = dataset_from_dict(payload)
        if factors is not None and list(factors) != list(data.factors):
            raise ParseError(f"tabulated factors {list(data.factors)} differ from requested {list(factors)}")
        return data
    names, records = read_records(path, factors)
    return aggregate(names, records)
