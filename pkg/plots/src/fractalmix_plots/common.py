"""Shared plumbing for the figure scripts."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import numpy as np

from fractalmix.artifacts import read_csv
from fractalmix.errors import SpecError


class SchemaError(SystemExit):
    def __init__(self, message: str):
        print(f"error: {message}", file=sys.stderr)
        super().__init__(2)


def load_table(path, expected_columns) -> tuple[dict | None, np.ndarray]:
    """Read a fractalmix CSV, enforce the schema, return (meta, float array)."""
    try:
        meta, header, rows = read_csv(path)
    except (SpecError, FileNotFoundError) as exc:
        raise SchemaError(str(exc))
    if header[:len(expected_columns)] != list(expected_columns):
        raise SchemaError(
            f"{path}: expected columns {list(expected_columns)}, got {header}")
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    data = np.zeros((len(rows), len(expected_columns)))
    for i, row in enumerate(rows):
        for j in range(len(expected_columns)):
            cell = row[j].strip() if j < len(row) else ""
            data[i, j] = float(cell) if cell else np.nan
    return meta, data


def write_outputs(fig, out_path, fits: dict) -> None:
    """Save the figure as PNG and SVG and the fitted numbers as JSON."""
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    base = out.with_suffix("")
    fig.savefig(base.with_suffix(".png"), dpi=150)
    fig.savefig(base.with_suffix(".svg"))
    base.with_suffix("").with_name(base.name + "_fits.json").write_text(
        json.dumps(fits, sort_keys=True, indent=2) + "\n", encoding="utf-8")
