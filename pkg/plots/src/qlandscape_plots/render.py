"""Render sweep CSV files into scaling and scatter figures.

The renderer is read-only over the CSV: it computes no statistics of its
own, so everything scientific stays upstream.  Output is deterministic for
a given CSV and spec (fixed style, salted SVG ids, no embedded dates).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .csvdata import read_csv, require_columns

_STYLE = {
    "figure.figsize": (7.0, 5.0),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "qlandscape-plots",
    "legend.fontsize": 8,
}


@dataclass
class PlotSpec:
    csv: Path
    kind: str = "scaling"          # "scaling" | "scatter"
    x: str = "n"
    y: str = "variance"
    group_by: tuple[str, ...] = ("depth", "scheme", "axes", "r", "cost")
    log_x: bool = False
    log_y: bool = True
    out: Path = Path("figure.svg")
    title: str = ""

    def __post_init__(self):
        self.csv = Path(self.csv)
        self.out = Path(self.out)
        if self.kind not in ("scaling", "scatter"):
            raise ValueError(f"unknown figure kind {self.kind!r}")


@dataclass
class Series:
    """One plotted group: raw strings straight from the CSV plus floats."""

    label: str
    raw_points: list[tuple[str, str]]
    xs: list[float]
    ys: list[float]
    yerr: "list[float] | None"


def collect_series(spec: PlotSpec) -> list[Series]:
    columns, rows = read_csv(spec.csv)
    require_columns(columns, [spec.x, spec.y, *spec.group_by])
    err_column = f"{spec.y}_stderr"
    has_err = err_column in columns
    groups: dict[tuple, list[dict[str, str]]] = {}
    for row in rows:
        key = tuple(row[c] for c in spec.group_by)
        groups.setdefault(key, []).append(row)
    series = []
    for key, members in groups.items():
        label = ",".join(f"{c}={v}" for c, v in zip(spec.group_by, key))
        usable = [m for m in members if m[spec.x] != "" and m[spec.y] != ""]
        if not usable:
            warnings.warn(f"group {label!r} has no plottable points; skipped", stacklevel=2)
            continue
        usable.sort(key=lambda m: float(m[spec.x]))
        xs = [float(m[spec.x]) for m in usable]
        ys = [float(m[spec.y]) for m in usable]
        yerr = None
        if has_err and all(m[err_column] != "" for m in usable):
            yerr = [float(m[err_column]) for m in usable]
        series.append(
            Series(
                label=label,
                raw_points=[(m[spec.x], m[spec.y]) for m in usable],
                xs=xs,
                ys=ys,
                yerr=yerr,
            )
        )
    return series


def render(spec: PlotSpec) -> list[Series]:
    """Write the figure and return the plotted series."""
    series = collect_series(spec)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for s in series:
            if spec.kind == "scaling":
                ax.errorbar(s.xs, s.ys, yerr=s.yerr, marker="o", markersize=3.5,
                            capsize=2, linewidth=1.2, label=s.label)
            else:
                ax.scatter(s.xs, s.ys, s=18, label=s.label)
        if spec.log_y:
            ax.set_yscale("log")
        if spec.log_x:
            ax.set_xscale("log")
        ax.set_xlabel(spec.x)
        ax.set_ylabel(spec.y)
        if spec.title:
            ax.set_title(spec.title)
        if series:
            ax.legend(loc="best")
        spec.out.parent.mkdir(parents=True, exist_ok=True)
        suffix = spec.out.suffix.lower()
        if suffix == ".svg":
            fig.savefig(spec.out, format="svg", metadata={"Date": None})
        elif suffix == ".png":
            fig.savefig(spec.out, format="png", metadata={"Software": "qlandscape-plots"})
        else:
            raise ValueError(f"unsupported output format {suffix!r}; use .svg or .png")
        plt.close(fig)
    return series


def dump_points(series: list[Series]) -> str:
    """Raw plotted values, one 'label|x|y' line per point, exactly as they
    appear in the CSV."""
    lines = []
    for s in series:
        for x_raw, y_raw in s.raw_points:
            lines.append(f"{s.label}|{x_raw}|{y_raw}")
    return "\n".join(lines)
