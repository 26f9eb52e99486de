"""Extraction of plottable data series from toolchain outputs.

The extracted series, not the PNG, is the tested artifact: rendering
draws exactly what these functions return, and every render writes the
series next to the image. Same input file, same series, byte for byte.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .schemas import validate_csv, validate_snapshot


class SchemaError(ValueError):
    """Input does not satisfy the documented contract."""

    def __init__(self, message: str, *, path: str | None = None,
                 row: int | None = None, column: str | None = None):
        self.path = path
        self.row = row
        self.column = column
        where = []
        if path is not None:
            where.append(str(path))
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where
                         else message)


def _load_clean(path: str | Path, expected_kind: str) -> list[dict]:
    report = validate_csv(path)
    if report.kind != expected_kind and report.ok:
        raise SchemaError(
            f"expected a {expected_kind} table, found {report.kind}",
            path=str(path))
    if not report.ok:
        first = report.violations[0]
        raise SchemaError(
            f"{first.message}; {len(report.violations)} violation(s) total",
            path=str(path), row=first.row, column=first.column)
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


def _series_label(row: dict, x: str) -> str:
    # Cells are conventionally named "<series...> <x>=<value>"; dropping
    # the x token leaves the series name shared along the sweep axis.
    token = f"{x}={row[x]}"
    parts = [part for part in row["cell"].split() if part != token]
    return " ".join(parts) if parts else row["group"]


def _x_value(row: dict, x: str, path: str | Path, index: int) -> float | int:
    text = row[x]
    if text == "":
        raise SchemaError("sweep column is empty", path=str(path),
                          row=index, column=x)
    return int(text) if x == "mu" else float(text)


def _filter_groups(rows: list[dict], groups: list[str] | None,
                   path: str | Path) -> list[dict]:
    if groups is None:
        return rows
    present = {row["group"] for row in rows}
    for name in groups:
        if name not in present:
            raise SchemaError(f"group {name!r} not present in the table",
                              path=str(path), column="group")
    wanted = set(groups)
    return [row for row in rows if row["group"] in wanted]


def heatmap_series(path: str | Path, *, x: str = "mu",
                   groups: list[str] | None = None) -> dict:
    """Success-rate matrix from a summary table.

    One matrix row per series (cell label minus the x token), one column
    per distinct x value; combinations the table does not contain are
    None. Values are the success_rate column, unmodified.
    """
    rows = _filter_groups(_load_clean(path, "summary"), groups, path)
    if not rows:
        raise SchemaError("summary table has no data rows", path=str(path))
    columns: list = []
    labels: list[str] = []
    cells: dict[tuple[str, float], float] = {}
    for index, row in enumerate(rows, start=1):
        value = _x_value(row, x, path, index)
        label = _series_label(row, x)
        if value not in columns:
            columns.append(value)
        if label not in labels:
            labels.append(label)
        if (label, value) in cells:
            raise SchemaError(
                f"duplicate cell for series {label!r} at {x}={value}",
                path=str(path), row=index, column="cell")
        cells[label, value] = float(row["success_rate"])
    columns.sort()
    return {
        "kind": "heatmap",
        "value": "success_rate",
        "x_label": x,
        "columns": columns,
        "rows": [{"label": label,
                  "values": [cells.get((label, value)) for value in columns]}
                 for label in labels],
    }


def curve_series(path: str | Path, *, x: str,
                 groups: list[str] | None = None) -> dict:
    """Mean/median generations against a sweep column, one series per group.

    Points are sorted by x within each group; `capped` marks points whose
    mean saturated at the generation cap (every run timed out there).
    """
    rows = _filter_groups(_load_clean(path, "summary"), groups, path)
    if not rows:
        raise SchemaError("summary table has no data rows", path=str(path))
    order: list[str] = []
    points: dict[str, list[tuple]] = {}
    for index, row in enumerate(rows, start=1):
        group = row["group"]
        value = _x_value(row, x, path, index)
        if group not in points:
            order.append(group)
            points[group] = []
        if any(existing[0] == value for existing in points[group]):
            raise SchemaError(
                f"duplicate point for group {group!r} at {x}={value}",
                path=str(path), row=index, column=x)
        points[group].append((value, float(row["mean_gens"]),
                              float(row["median_gens"]),
                              int(row["generation_cap"])))
    series = []
    for group in order:
        ordered = sorted(points[group])
        cap = max(item[3] for item in ordered)
        series.append({
            "label": group,
            "x": [item[0] for item in ordered],
            "mean": [item[1] for item in ordered],
            "median": [item[2] for item in ordered],
            "capped": [item[1] >= item[3] for item in ordered],
            "generation_cap": cap,
        })
    return {"kind": "curve", "x_label": x, "series": series}


def snapshot_series(path: str | Path) -> dict:
    """Population points from a snapshot JSON, in file order."""
    report = validate_snapshot(path)
    if not report.ok:
        first = report.violations[0]
        raise SchemaError(
            f"{first.message}; {len(report.violations)} violation(s) total",
            path=str(path), row=first.row, column=first.column)
    with open(path, encoding="utf-8") as handle:
        doc = json.load(handle)
    return {
        "kind": "snapshot",
        "n": doc["n"],
        "generation": doc["generation"],
        "points": [{"ones": member["ones"],
                    "raw_fitness": member["raw_fitness"],
                    "cleared": member["cleared"],
                    "winner": member["winner"]}
                   for member in doc["members"]],
    }
