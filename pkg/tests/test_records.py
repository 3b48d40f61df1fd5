import io
import json

import pytest

from clusterstats.cli import run
from clusterstats.errors import ParseError
from clusterstats.records import aggregate, dataset_from_dict, dataset_to_dict, ingest, read_records


def write(tmp_path, text, name="records.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def by_levels(data):
    return {r.levels: (r.exposure, r.events) for r in data.rows}


@pytest.mark.parametrize(
    "name,deaths",
    [("shifts_unbiased.csv", (7, 3, 2, 4)), ("shifts_biased.csv", (8, 4, 1, 3))],
)
def test_shift_records_aggregate_to_four_groups(fixtures_dir, name, deaths):
    data = ingest(fixtures_dir / name)
    assert data.factors == ("nurse", "morning")
    assert len(data) == 4
    groups = by_levels(data)
    order = [("yes", "yes"), ("yes", "no"), ("no", "yes"), ("no", "no")]
    assert [groups[k][0] for k in order] == [8, 7, 2, 28]
    assert [groups[k][1] for k in order] == list(deaths)
    # rows come out in lexicographic order of their level tuples
    assert [r.levels for r in data.rows] == sorted(order)


def test_explicit_factor_selection(fixtures_dir):
    data = ingest(fixtures_dir / "shifts_unbiased.csv", factors=["nurse"])
    assert by_levels(data) == {("no",): (30.0, 6), ("yes",): (15.0, 10)}


def test_single_row_and_duplicate_tuples(tmp_path):
    single = ingest(write(tmp_path, "g,exposure,events\na,2.5,3\n"))
    assert by_levels(single) == {("a",): (2.5, 3)}
    merged = ingest(write(tmp_path, "g,exposure,events\na,3,1\nb,1,0\na,4,2\n"))
    assert by_levels(merged) == {("a",): (7.0, 3), ("b",): (1.0, 0)}


def test_blank_lines_and_bom_tolerated(tmp_path):
    path = tmp_path / "bom.csv"
    path.write_bytes("﻿g,events\r\na,1\r\n\r\nb,2\r\n".encode("utf-8"))
    assert by_levels(ingest(path)) == {("a",): (1.0, 1), ("b",): (1.0, 2)}


@pytest.mark.parametrize(
    "text,line,fragment",
    [
        ("", 1, "empty"),
        ("g,exposure\na,1\n", 1, "events"),
        ("g,events\na,1\nb,two\n", 3, "not an integer"),
        ("g,events\na,1\nb,-4\n", 3, "negative"),
        ("g,exposure,events\na,0,1\n", 2, "exposure"),
        ("g,exposure,events\na,x,1\n", 2, "not a number"),
        ("g,events\na,1,7\n", 2, "fields"),
        ("g,events\n,1\n", 2, "empty value"),
        ("g,events\n", 2, "no data rows"),
    ],
)
def test_parse_errors_carry_line_numbers(tmp_path, text, line, fragment):
    with pytest.raises(ParseError) as info:
        ingest(write(tmp_path, text))
    assert info.value.line == line
    assert f"line {line}" in str(info.value)
    assert fragment in str(info.value)


def test_missing_declared_factor(tmp_path):
    with pytest.raises(ParseError, match="'ward'"):
        read_records(write(tmp_path, "g,events\na,1\n"), factors=["ward"])


def test_missing_file(tmp_path):
    with pytest.raises(ParseError, match="cannot open"):
        ingest(tmp_path / "nope.csv")


def test_dict_round_trip(fixtures_dir):
    data = ingest(fixtures_dir / "shifts_biased.csv")
    assert dataset_from_dict(json.loads(json.dumps(dataset_to_dict(data)))) == data


def test_tabulate_json_round_trip(fixtures_dir, tmp_path):
    source = fixtures_dir / "shifts_unbiased.csv"
    out = io.StringIO()
    assert run(["tabulate", str(source), "--json"], stdout=out) == 0
    report = write(tmp_path, out.getvalue(), "tabulated.json")
    assert ingest(report) == ingest(source)


def test_aggregate_is_order_independent(fixtures_dir):
    factors, records = read_records(fixtures_dir / "shifts_unbiased.csv")
    assert aggregate(factors, records) == aggregate(factors, list(reversed(records)))
