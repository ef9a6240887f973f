"""Deterministic JSON and CSV emission.

Identical inputs must produce byte-identical output files, so floats are
always rendered with 17 significant digits (enough to round-trip float64)
and object keys are sorted. Nothing time- or locale-dependent is written.
"""

from __future__ import annotations

import json
import math

from .errors import FormatError


def format_float(x: float) -> str:
    if not math.isfinite(x):
        raise FormatError(f"cannot serialize non-finite value {x!r}")
    if x == 0.0:
        return "0"
    return format(float(x), ".17g")


def _emit(obj, out: list[str]):
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj, key=str)):
            if not isinstance(key, str):
                raise FormatError(f"JSON object keys must be strings, got {key!r}")
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(":")
            _emit(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _emit(item, out)
        out.append("]")
    else:
        raise FormatError(f"cannot serialize {type(obj).__name__}")


def dumps_canonical(obj) -> str:
    """Serialize to canonical JSON text (sorted keys, 17-digit floats)."""
    out: list[str] = []
    _emit(obj, out)
    out.append("\n")
    return "".join(out)


def write_canonical(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_canonical(obj))


def csv_cell(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def write_csv(path, schema_comment: str, header: list[str], rows: list[list]):
    """Write a CSV file with a leading ``#`` schema comment line."""
    lines = [f"# {schema_comment}", ",".join(header)]
    for row in rows:
        lines.append(",".join(csv_cell(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
