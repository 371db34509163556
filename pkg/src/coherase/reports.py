"""Report writers: comma-separated tables and JSON documents.

Every report opens with a run manifest.  In the tabular form the manifest is a
block of ``# key: value`` lines; the body that follows (header row plus data
rows) depends only on the configuration and master seed.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable, Mapping, Sequence

FLOAT_FMT = "{:.9f}"


def format_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return FLOAT_FMT.format(value)
    return str(value)


def table_body(columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def manifest_lines(manifest: Mapping[str, Any]) -> str:
    out = []
    for key, value in manifest.items():
        text = value if isinstance(value, str) else json.dumps(value, sort_keys=True)
        out.append(f"# {key}: {text}\n")
    return "".join(out)


def render_tabular(manifest: Mapping[str, Any], columns: Sequence[str], rows) -> str:
    return manifest_lines(manifest) + table_body(columns, rows)


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if hasattr(value, "item"):  # numpy scalars
        return _jsonable(value.item())
    return value


def render_structured(manifest: Mapping[str, Any], columns: Sequence[str], rows) -> str:
    doc = {
        "manifest": dict(manifest),
        "columns": list(columns),
        "rows": [{c: _jsonable(r.get(c)) for c in columns} for r in rows],
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def split_tabular(text: str) -> tuple[dict[str, str], str]:
    """Separate a tabular report into its manifest and its body."""
    manifest: dict[str, str] = {}
    body_start = 0
    lines = text.splitlines(keepends=True)
    for i, line in enumerate(lines):
        if line.startswith("# "):
            key, _, value = line[2:].rstrip("\n").partition(": ")
            manifest[key] = value
        else:
            body_start = i
            break
    else:
        body_start = len(lines)
    return manifest, "".join(lines[body_start:])


def read_tabular(text: str) -> tuple[dict[str, str], list[dict[str, str]]]:
    manifest, body = split_tabular(text)
    return manifest, list(csv.DictReader(io.StringIO(body)))
