"""Figure rendering from toolchain CSV/JSON outputs.

Four figure kinds: success-rate heatmap, runtime-vs-population-size
curve, runtime-vs-peak-distance curve, and a population snapshot scatter
over the two-peak fitness silhouette. Every render writes the image plus
a `.series.json` sidecar holding the exact data drawn, so tests compare
numbers instead of pixels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")  # headless; selected before pyplot import

import matplotlib.pyplot as plt
import numpy as np

from .series import SchemaError, curve_series, heatmap_series, snapshot_series

KINDS = ("heatmap", "mu-curve", "distance-curve", "snapshot")

# Fixed fonts and sizes keep renders reproducible across runs.
_RC = {
    "font.family": "DejaVu Sans",
    "font.size": 9.0,
    "axes.titlesize": 10.0,
    "figure.dpi": 100.0,
    "savefig.dpi": 150.0,
}

_OPTION_KEYS = frozenset({"title", "groups", "x", "annotate", "figsize"})


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    input: str
    out: str
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(
                f"unknown figure kind {self.kind!r}, expected one of "
                f"{list(KINDS)}")
        unknown = set(self.options) - _OPTION_KEYS
        if unknown:
            raise SchemaError(f"unknown options: {sorted(unknown)}")
        if "x" in self.options and self.kind != "heatmap":
            raise SchemaError("the x option only applies to heatmaps")
        groups = self.options.get("groups")
        if groups is not None and (
                not isinstance(groups, list)
                or not all(isinstance(name, str) for name in groups)):
            raise SchemaError("groups must be a list of group names")

    @classmethod
    def from_json_dict(cls, doc: dict) -> "FigureSpec":
        if not isinstance(doc, dict):
            raise SchemaError("figure spec must be a JSON object")
        unknown = set(doc) - {"kind", "input", "out", "options"}
        if unknown:
            raise SchemaError(f"unknown spec fields: {sorted(unknown)}")
        for name in ("kind", "input", "out"):
            if not isinstance(doc.get(name), str) or not doc[name]:
                raise SchemaError(f"spec field {name!r} must be a "
                                  "non-empty string")
        options = doc.get("options", {})
        if not isinstance(options, dict):
            raise SchemaError("options must be an object")
        return cls(kind=doc["kind"], input=doc["input"], out=doc["out"],
                   options=options)

    @classmethod
    def from_file(cls, path: str | Path) -> "FigureSpec":
        with open(path, encoding="utf-8") as handle:
            try:
                doc = json.load(handle)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"spec is not valid JSON: {exc}",
                                  path=str(path)) from exc
        return cls.from_json_dict(doc)


def extract_series(spec: FigureSpec) -> dict:
    groups = spec.options.get("groups")
    if spec.kind == "heatmap":
        return heatmap_series(spec.input, x=spec.options.get("x", "mu"),
                              groups=groups)
    if spec.kind == "mu-curve":
        return curve_series(spec.input, x="mu", groups=groups)
    if spec.kind == "distance-curve":
        return curve_series(spec.input, x="d", groups=groups)
    return snapshot_series(spec.input)


def render(spec: FigureSpec) -> dict:
    """Draw the figure and write image plus series sidecar.

    Returns {"kind", "image", "series"} with the two output paths.
    """
    series = extract_series(spec)
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(_RC):
        if spec.kind == "heatmap":
            figure = _draw_heatmap(series, spec.options)
        elif spec.kind in ("mu-curve", "distance-curve"):
            figure = _draw_curves(series, spec.options,
                                  log_x=spec.kind == "mu-curve")
        else:
            figure = _draw_snapshot(series, spec.options)
        figure.savefig(out)
        plt.close(figure)
    sidecar = out.with_suffix(".series.json")
    with open(sidecar, "w", encoding="utf-8") as handle:
        json.dump(series, handle, indent=2)
        handle.write("\n")
    return {"kind": spec.kind, "image": str(out), "series": str(sidecar)}


def render_file(spec_path: str | Path) -> dict:
    return render(FigureSpec.from_file(spec_path))


def _figsize(options: dict, default: tuple[float, float]):
    size = options.get("figsize")
    if size is None:
        return default
    if (not isinstance(size, list) or len(size) != 2
            or not all(isinstance(v, (int, float)) and v > 0 for v in size)):
        raise SchemaError("figsize must be [width, height] in inches")
    return (float(size[0]), float(size[1]))


def _draw_heatmap(series: dict, options: dict):
    labels = [row["label"] for row in series["rows"]]
    matrix = np.array(
        [[np.nan if v is None else v for v in row["values"]]
         for row in series["rows"]], dtype=float)
    width = 1.9 + 0.62 * len(series["columns"])
    height = 1.15 + 0.42 * len(labels)
    figure, axes = plt.subplots(figsize=_figsize(options, (width, height)))
    colormap = plt.get_cmap("viridis").copy()
    colormap.set_bad("#d4d4d4")
    image = axes.imshow(matrix, cmap=colormap, vmin=0.0, vmax=1.0,
                        aspect="auto")
    axes.set_xticks(range(len(series["columns"])),
                    [str(c) for c in series["columns"]])
    axes.set_yticks(range(len(labels)), labels)
    axes.set_xlabel(series["x_label"])
    if options.get("annotate", True):
        for i in range(matrix.shape[0]):
            for j in range(matrix.shape[1]):
                if np.isnan(matrix[i, j]):
                    continue
                color = "white" if matrix[i, j] < 0.55 else "black"
                axes.text(j, i, format(matrix[i, j], ".2f"),
                          ha="center", va="center", color=color, fontsize=7)
    figure.colorbar(image, ax=axes, label=series["value"], shrink=0.85)
    axes.set_title(options.get("title", "success rate"))
    figure.tight_layout()
    return figure

_COLORS = ("tab:blue", "tab:red", "tab:green", "tab:orange", "tab:purple",
           "tab:brown", "tab:pink", "tab:gray", "tab:olive", "tab:cyan")


def _draw_curves(series: dict, options: dict, log_x: bool):
    figure, axes = plt.subplots(figsize=_figsize(options, (5.4, 3.6)))
    cap = max(entry["generation_cap"] for entry in series["series"])
    axes.axhline(cap, color="#888888", linestyle=":", linewidth=1.0)
    axes.annotate("cap", (0.995, cap), xycoords=("axes fraction", "data"),
                  ha="right", va="bottom", fontsize=7, color="#888888")
    for index, entry in enumerate(series["series"]):
        color = _COLORS[index % len(_COLORS)]
        axes.plot(entry["x"], entry["mean"], color=color, marker="o",
                  markersize=4, linewidth=1.4, label=entry["label"])
        axes.plot(entry["x"], entry["median"], color=color, linestyle="--",
                  linewidth=1.0, alpha=0.65)
        saturated = [(x, mean) for x, mean, flagged
                     in zip(entry["x"], entry["mean"], entry["capped"])
                     if flagged]
        if saturated:
            axes.plot([p[0] for p in saturated], [p[1] for p in saturated],
                      linestyle="none", marker="x", markersize=7,
                      color="black")
    if log_x:
        axes.set_xscale("log", base=2)
        axes.set_xticks(series["series"][0]["x"])
        axes.get_xaxis().set_major_formatter(
            matplotlib.ticker.ScalarFormatter())
    axes.set_xlabel(series["x_label"])
    axes.set_ylabel("generations (mean solid, median dashed)")
    axes.set_title(options.get("title", "runtime"))
    axes.legend(loc="upper left", fontsize=8)
    axes.grid(alpha=0.3)
    figure.tight_layout()
    return figure


def _draw_snapshot(series: dict, options: dict):
    n = series["n"]
    figure, axes = plt.subplots(figsize=_figsize(options, (5.4, 3.6)))
    silhouette = [max(u, n - u) for u in range(n + 1)]
    axes.plot(range(n + 1), silhouette, color="#aaaaaa", linewidth=1.2,
              zorder=1)
    # Members stack on identical coordinates; encode multiplicity as size.
    counts: dict[tuple, int] = {}
    for point in series["points"]:
        optimal = point["raw_fitness"] == n
        key = (point["ones"], point["raw_fitness"], point["cleared"],
               point["winner"], optimal)
        counts[key] = counts.get(key, 0) + 1
    for key in sorted(counts):
        ones, fitness, cleared, winner, optimal = key
        size = 22.0 + 16.0 * (counts[key] - 1)
        if optimal:
            style = {"color": "tab:red", "marker": "o"}
        elif winner:
            style = {"color": "tab:blue", "marker": "o"}
        else:
            style = {"facecolors": "none", "edgecolors": "#666666",
                     "marker": "o"}
        axes.scatter([ones], [fitness], s=size, zorder=3 if optimal else 2,
                     **style)
    axes.set_xlim(-0.5, n + 0.5)
    axes.set_ylim(0, n + 1)
    axes.set_xlabel("number of ones")
    axes.set_ylabel("raw fitness")
    axes.set_title(options.get(
        "title", f"population at generation {series['generation']}"))
    figure.tight_layout()
    return figure
