"""Render experiment report CSVs as figures.

Input files are the summary CSVs the experiment harness emits (`report
--kind bars|curves`): statistics are already computed there, and this
script only draws the columns it is given. Bars show a convergence
probability per condition grouped along the risk axis; curves show block
means with a standard-error band.

Figures are deterministic for a fixed input: fixed size, fixed fonts,
fixed colors keyed by prosociality assignment so the same condition looks
identical across every figure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

# One fixed color per prosociality assignment, shared by all figure kinds.
ASSIGNMENT_COLORS = {
    "none": "#555555",
    "single": "#1f77b4",
    "all": "#d62728",
    "center": "#2ca02c",
    "leaf": "#9467bd",
    "custom": "#8c564b",
}
FALLBACK_COLORS = ["#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


class SchemaError(ValueError):
    """A referenced column is missing from the CSV header."""


@dataclass(frozen=True)
class PlotSpec:
    """What to draw: input CSV, figure kind, grouping, output path."""

    csv_path: str
    kind: str  # "bars" | "curves"
    out_path: str
    group_by: tuple = ("assignment",)
    x_column: str = ""  # default depends on kind: risk (bars) / block (curves)
    value_column: str = ""  # payoff_dominant_rate (bars) / mean_reward_mean (curves)
    error_column: str = ""  # derived from value column when empty
    filters: dict = field(default_factory=dict)
    title: str = ""

    def resolved(self) -> "PlotSpec":
        if self.kind not in ("bars", "curves"):
            raise ValueError(f"kind must be 'bars' or 'curves', got {self.kind!r}")
        x = self.x_column or ("risk" if self.kind == "bars" else "block")
        value = self.value_column or (
            "payoff_dominant_rate" if self.kind == "bars" else "mean_reward_mean"
        )
        error = self.error_column or {
            "payoff_dominant_rate": "payoff_dominant_se",
            "mean_reward_mean": "mean_reward_se",
            "coord_rate_mean": "coord_rate_se",
        }.get(value, "")
        filters = dict(self.filters)
        if self.kind == "curves" and "agent" not in filters:
            filters["agent"] = "mean"
        return PlotSpec(
            self.csv_path, self.kind, self.out_path, tuple(self.group_by),
            x, value, error, filters, self.title,
        )


def read_rows(path, required_columns) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [col for col in required_columns if col and col not in header]
        if missing:
            raise SchemaError(f"columns {missing} not in CSV header {header}")
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path} has no data rows")
    return rows


def _to_float(value: str) -> float:
    return math.nan if value in ("", None) else float(value)


def _group_color(label: str, index: int) -> str:
    for part in label.split("|"):
        if part in ASSIGNMENT_COLORS:
            return ASSIGNMENT_COLORS[part]
    return FALLBACK_COLORS[index % len(FALLBACK_COLORS)]


def render(spec: PlotSpec) -> str:
    """Draw the figure and write it to the spec's output path."""
    spec = spec.resolved()
    needed = list(spec.group_by) + [spec.x_column, spec.value_column, spec.error_column]
    needed += list(spec.filters)
    rows = read_rows(spec.csv_path, needed)
    rows = [r for r in rows if all(r[col] == val for col, val in spec.filters.items())]
    if not rows:
        raise ValueError(f"filters {spec.filters} removed every row of {spec.csv_path}")

    groups: dict[str, list[dict]] = {}
    for row in rows:
        label = "|".join(row[col] for col in spec.group_by)
        groups.setdefault(label, []).append(row)

    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=120)
    if spec.kind == "bars":
        _draw_bars(ax, spec, groups)
    else:
        _draw_curves(ax, spec, groups)
    ax.set_xlabel(spec.x_column)
    ax.set_ylabel(spec.value_column)
    if spec.title:
        ax.set_title(spec.title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.out_path, metadata={"Software": "staghunt-plots"})
    plt.close(fig)
    return spec.out_path


def _draw_bars(ax, spec: PlotSpec, groups: dict) -> None:
    x_values = sorted({_to_float(r[spec.x_column]) for rows in groups.values() for r in rows})
    positions = {x: i for i, x in enumerate(x_values)}
    width = 0.8 / len(groups)
    for gi, label in enumerate(sorted(groups)):
        rows = sorted(groups[label], key=lambda r: _to_float(r[spec.x_column]))
        xs = [positions[_to_float(r[spec.x_column])] + (gi - (len(groups) - 1) / 2) * width for r in rows]
        heights = [_to_float(r[spec.value_column]) for r in rows]
        errors = [_to_float(r[spec.error_column]) if spec.error_column else math.nan for r in rows]
        yerr = None if all(math.isnan(e) for e in errors) else [0 if math.isnan(e) else e for e in errors]
        ax.bar(xs, heights, width=width, yerr=yerr, capsize=2,
               color=_group_color(label, gi), label=label)
    ax.set_xticks(range(len(x_values)))
    ax.set_xticklabels([f"{x:g}" for x in x_values])
    ax.set_ylim(0, 1.05)


def _draw_curves(ax, spec: PlotSpec, groups: dict) -> None:
    for gi, label in enumerate(sorted(groups)):
        rows = sorted(groups[label], key=lambda r: _to_float(r[spec.x_column]))
        xs = np.array([_to_float(r[spec.x_column]) for r in rows])
        ys = np.array([_to_float(r[spec.value_column]) for r in rows])
        if spec.error_column:
            es = np.array([_to_float(r[spec.error_column]) for r in rows])
            band = np.where(np.isnan(es), 0.0, es)
            ax.fill_between(xs, ys - band, ys + band, alpha=0.25,
                            color=_group_color(label, gi), linewidth=0)
        ax.plot(xs, ys, color=_group_color(label, gi), label=label, marker="o", markersize=3)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="staghunt-plot")
    parser.add_argument("csv_path")
    parser.add_argument("--kind", choices=("bars", "curves"), required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--group-by", default="assignment",
                        help="comma-separated grouping columns")
    parser.add_argument("--x", default="", dest="x_column")
    parser.add_argument("--value", default="", dest="value_column")
    parser.add_argument("--error", default="", dest="error_column")
    parser.add_argument("--filter", action="append", default=[],
                        help="col=value row filter; repeatable")
    parser.add_argument("--title", default="")
    args = parser.parse_args(argv)
    filters = {}
    for item in args.filter:
        col, _, value = item.partition("=")
        filters[col] = value
    spec = PlotSpec(
        csv_path=args.csv_path,
        kind=args.kind,
        out_path=args.out,
        group_by=tuple(c for c in args.group_by.split(",") if c),
        x_column=args.x_column,
        value_column=args.value_column,
        error_column=args.error_column,
        filters=filters,
        title=args.title,
    )
    render(spec)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
