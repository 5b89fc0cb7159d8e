"""Deterministic experiment artifacts.

Every CSV starts with one comment line echoing the tool version and the
experiment configuration as compact JSON, then a header row.  Floats are
written with repr (shortest round-trip), so identical runs give byte-
identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

from . import __version__
from .errors import SpecError

COMMENT_PREFIX = "# fractalmix"


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def config_line(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return f"{COMMENT_PREFIX} {__version__} | {blob}"


def write_csv(path, header, rows, config: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [config_line(config), ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path):
    """Returns (meta dict or None, header list, rows as string lists)."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    meta = None
    if lines and lines[0].startswith("#"):
        head = lines.pop(0)
        if "|" in head:
            try:
                meta = json.loads(head.split("|", 1)[1])
            except json.JSONDecodeError:
                meta = None
    if not lines:
        raise SpecError(f"{path}: empty CSV")
    header = [h.strip() for h in lines[0].split(",")]
    rows = [ln.split(",") for ln in lines[1:]]
    return meta, header, rows


def require_columns(path, header, expected) -> None:
    if header[:len(expected)] != list(expected):
        raise SpecError(
            f"{path}: schema mismatch, expected columns {expected}, got {header}")


def write_report(path, payload: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = dict(payload)
    payload.setdefault("tool", {"name": "fractalmix", "version": __version__})
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


def read_report(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid report JSON: {exc}") from exc
