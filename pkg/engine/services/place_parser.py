"""Place-list parser for the global height bound.

A plain-text place list has one place per line::

    # the worked example
    real r=2
    padic p=2 n=-1 weight=1

``.yaml``/``.yml`` and ``.json`` files hold a list of mappings with the same
keys plus ``kind: real|padic``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import yaml
from pydantic import ValidationError

from engine.errors import SpecParseError
from shared.schemas import PlaceSpec

_REAL_KEYS = {"r": float, "weight": str}
_PADIC_KEYS = {"p": int, "e": int, "f": int, "n": int, "weight": str}
_REQUIRED = {"real": ("r",), "padic": ("p", "n")}


def parse_place_file(path: str | Path) -> list[PlaceSpec]:
    """Read a place list from disk.

    Raises:
        FileNotFoundError: If the file does not exist.
        SpecParseError: If the file is empty or a place cannot be read.
    """
    full_path = Path(path)
    if not full_path.is_file():
        raise FileNotFoundError(f"Place file not found: {full_path}")
    content = full_path.read_text(encoding="utf-8")

    suffix = full_path.suffix.lower()
    if suffix in (".yaml", ".yml"):
        return _parse_mappings(_load_yaml(content))
    if suffix == ".json":
        return _parse_mappings(_load_json(content))
    return parse_place_text(content)


def parse_place_text(content: str) -> list[PlaceSpec]:
    """Parse the line-oriented place format."""
    places: list[PlaceSpec] = []
    for number, line in enumerate(content.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        kind, *tokens = stripped.split()
        fields: dict[str, str] = {}
        for token in tokens:
            key, sep, value = token.partition("=")
            if not sep or not key or not value:
                raise SpecParseError(f"expected key=value, got {token!r}", number)
            if key in fields:
                raise SpecParseError(f"key {key!r} given twice", number)
            fields[key] = value
        places.append(_build_place(kind, fields, number))
    if not places:
        raise SpecParseError("no places given")
    return places


def _load_yaml(content: str) -> Any:
    try:
        return yaml.safe_load(content)
    except yaml.YAMLError as exc:
        raise SpecParseError(f"invalid YAML: {exc}") from exc


def _load_json(content: str) -> Any:
    try:
        return json.loads(content)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"invalid JSON: {exc.msg}", exc.lineno) from exc


def _parse_mappings(data: Any) -> list[PlaceSpec]:
    if not data:
        raise SpecParseError("no places given")
    if not isinstance(data, list):
        raise SpecParseError("place file must hold a list of places at the top level")
    places = []
    for index, entry in enumerate(data, start=1):
        if not isinstance(entry, dict):
            raise SpecParseError(f"place {index} is not a mapping")
        fields = {str(k): str(v) for k, v in entry.items()}
        kind = fields.pop("kind", "")
        places.append(_build_place(kind, fields, None, label=f"place {index}"))
    return places


def _build_place(
    kind: str, fields: dict[str, str], line: int | None, label: str | None = None
) -> PlaceSpec:
    prefix = f"{label}: " if label else ""
    allowed = {"real": _REAL_KEYS, "padic": _PADIC_KEYS}.get(kind)
    if allowed is None:
        raise SpecParseError(f"{prefix}unknown place kind {kind!r}", line)
    unknown = sorted(set(fields) - set(allowed))
    if unknown:
        raise SpecParseError(f"{prefix}unknown keys {unknown} for {kind}", line)
    missing = [key for key in _REQUIRED[kind] if key not in fields]
    if missing:
        raise SpecParseError(f"{prefix}missing {missing} for {kind}", line)

    values: dict[str, Any] = {}
    for key, raw in fields.items():
        try:
            values[key] = allowed[key](raw)
        except ValueError as exc:
            raise SpecParseError(f"{prefix}bad value {raw!r} for {key}", line) from exc

    try:
        if kind == "real":
            return PlaceSpec.real(**values)
        return PlaceSpec.padic(**values)
    except ValidationError as exc:
        message = "; ".join(err["msg"] for err in exc.errors())
        raise SpecParseError(f"{prefix}{message}", line) from exc
