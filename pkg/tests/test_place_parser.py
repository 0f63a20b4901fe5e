"""Tests for reading place lists from text, YAML and JSON files.

Covers:
1. Line format: comments, defaults, weights
2. YAML and JSON lists of mappings
3. Error reporting with line numbers
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import pytest
import yaml

from engine.errors import SpecParseError
from engine.services.place_parser import parse_place_file, parse_place_text
from shared.schemas import PlaceKind, PlaceSpec

EXAMPLE_TEXT = """\
# two places
real r=2
padic p=2 n=-1   # the half disc
"""


# =============================================================================
# 1. Line format
# =============================================================================


def test_parse_example() -> None:
    """Comments and blank lines are skipped; defaults fill e, f and weight."""
    places = parse_place_text(EXAMPLE_TEXT)
    assert places == [PlaceSpec.real(2.0), PlaceSpec.padic(p=2, n=-1)]
    assert places[1].field is not None
    assert (places[1].field.e, places[1].field.f) == (1, 1)
    assert places[0].weight == Fraction(1)


def test_parse_all_keys() -> None:
    """e, f and fractional weights are read."""
    (place,) = parse_place_text("padic p=3 e=2 f=2 n=-4 weight=1/4\n")
    assert place.kind == PlaceKind.NONARCHIMEDEAN
    assert place.field is not None
    assert (place.field.p, place.field.e, place.field.f, place.n) == (3, 2, 2, -4)
    assert place.weight == Fraction(1, 4)


def test_parse_real_weight() -> None:
    """Real places take a weight too."""
    (place,) = parse_place_text("real r=1.5 weight=1/2")
    assert place.interval is not None
    assert place.interval.r == 1.5
    assert place.weight == Fraction(1, 2)


# =============================================================================
# 2. Files
# =============================================================================


def test_parse_text_file(tmp_path: Path) -> None:
    """Files without a YAML or JSON suffix use the line format."""
    path = tmp_path / "places.txt"
    path.write_text(EXAMPLE_TEXT, encoding="utf-8")
    assert len(parse_place_file(path)) == 2


def test_parse_yaml_file(tmp_path: Path) -> None:
    """A YAML list of mappings with a kind key."""
    path = tmp_path / "places.yaml"
    data = [{"kind": "real", "r": 2}, {"kind": "padic", "p": 2, "n": -1, "weight": "1/2"}]
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    places = parse_place_file(path)
    assert places[0] == PlaceSpec.real(2.0)
    assert places[1].weight == Fraction(1, 2)


def test_parse_json_file(tmp_path: Path) -> None:
    """The same structure as JSON."""
    path = tmp_path / "places.json"
    path.write_text(json.dumps([{"kind": "padic", "p": 5, "n": -2}]), encoding="utf-8")
    assert parse_place_file(path) == [PlaceSpec.padic(p=5, n=-2)]


def test_missing_file(tmp_path: Path) -> None:
    """A missing file is reported as such."""
    with pytest.raises(FileNotFoundError):
        parse_place_file(tmp_path / "nope.txt")


@pytest.mark.parametrize(
    ("name", "content"),
    [
        ("bad.yaml", "- kind: real\n  r: [unclosed\n"),
        ("bad.json", "[{\"kind\": \"real\",}]"),
        ("scalar.yaml", "real\n"),
        ("empty.json", "[]"),
        ("list.yaml", "- [real, 2]\n"),
    ],
)
def test_structured_file_errors(tmp_path: Path, name: str, content: str) -> None:
    """Malformed or empty structured files raise SpecParseError."""
    path = tmp_path / name
    path.write_text(content, encoding="utf-8")
    with pytest.raises(SpecParseError):
        parse_place_file(path)


# =============================================================================
# 3. Errors
# =============================================================================


@pytest.mark.parametrize(
    ("content", "line", "fragment"),
    [
        ("real r=2\ncomplex r=1\n", 2, "unknown place kind"),
        ("real r=2 p=3\n", 1, "unknown keys"),
        ("padic p=2\n", 1, "missing"),
        ("real r\n", 1, "key=value"),
        ("real r=2 r=3\n", 1, "twice"),
        ("padic p=2 n=one\n", 1, "bad value"),
        ("# c\n\npadic p=4 n=-1\n", 3, "not prime"),
        ("real r=-1\n", 1, "greater than 0"),
        ("real r=2 weight=2\n", 1, "weight"),
    ],
)
def test_line_errors(content: str, line: int, fragment: str) -> None:
    """Each failure names its line and what went wrong."""
    with pytest.raises(SpecParseError) as excinfo:
        parse_place_text(content)
    assert excinfo.value.line == line
    assert fragment in str(excinfo.value)
    assert str(excinfo.value).startswith(f"line {line}: ")


@pytest.mark.parametrize("content", ["", "# only comments\n\n"])
def test_no_places(content: str) -> None:
    """An empty list is an error, not a zero bound."""
    with pytest.raises(SpecParseError, match="no places"):
        parse_place_text(content)


def test_structured_error_labels_place(tmp_path: Path) -> None:
    """Structured files report the index of the offending place."""
    path = tmp_path / "places.json"
    path.write_text(json.dumps([{"kind": "real", "r": 2}, {"kind": "padic", "p": 2}]))
    with pytest.raises(SpecParseError, match="place 2"):
        parse_place_file(path)
