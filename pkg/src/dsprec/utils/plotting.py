"""Line plots of sweep CSVs, rendered to SVG with matplotlib.

The plot depends only on the CSV text: regenerating from the same CSV gives
the same bytes.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from .io import read_csv  # noqa: E402

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")

SERIES_LABELS = {
    "dist_l1": "L1 solution",
    "dist_l2": "L2 solution",
    "dist_linf": "Linf solution",
    "dist_gd": "GD limit",
    "dist_ref": "W_ref",
}

# Fixed element ids and no timestamp keep the SVG byte-stable
SVG_RC = {
    "svg.hashsalt": "dsprec",
    "svg.fonttype": "none",
}


@dataclass
class SweepSeries:
    """Plot-ready data parsed from a sweep CSV."""

    xlabel: str
    ylabel: str
    lines: dict[str, list[tuple[float, float]]] = field(default_factory=dict)


def _series_columns(header: list[str]) -> tuple[list[str], str | None]:
    """Series to draw, and the column to normalize by (step-size sweeps)."""
    if "dist_ref" in header:
        return ["dist_ref", "dist_gd"], "ref_norm"
    return ["dist_l1", "dist_l2", "dist_linf", "dist_gd"], None


def sweep_series(csv_text: str) -> SweepSeries:
    """Distance series per reference column present in the CSV.

    Step-size sweeps are divided by ``ref_norm``; empty and non-finite cells
    are skipped.
    """
    rows = read_csv(csv_text)
    if not rows:
        raise ValueError("cannot plot an empty sweep")
    columns, norm_col = _series_columns(list(rows[0].keys()))
    xs = [float(r["value"]) for r in rows]

    series = SweepSeries(
        xlabel=rows[0]["param"],
        ylabel="distance / ||W_ref||" if norm_col else "distance",
    )
    for col in columns:
        points = []
        for x, r in zip(xs, rows, strict=True):
            if not r.get(col):
                continue
            y = float(r[col])
            if norm_col and r.get(norm_col):
                y /= float(r[norm_col])
            if math.isfinite(y):
                points.append((x, y))
        if points:
            series.lines[SERIES_LABELS.get(col, col)] = points
    return series


def sweep_figure(csv_text: str, title: str) -> Figure:
    series = sweep_series(csv_text)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for i, (label, points) in enumerate(series.lines.items()):
        xs, ys = zip(*points, strict=True)
        ax.plot(xs, ys, marker="o", markersize=3, color=COLORS[i % len(COLORS)], label=label)
    ax.set_xscale("log")
    ax.set_xlabel(series.xlabel)
    ax.set_ylabel(series.ylabel)
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    if series.lines:
        ax.legend(loc="center left", bbox_to_anchor=(1.02, 0.5))
    fig.tight_layout()
    return fig


def render_sweep_svg(csv_text: str, title: str) -> str:
    """One line per reference column present in the CSV, log-scaled x-axis."""
    with matplotlib.rc_context(SVG_RC):
        fig = sweep_figure(csv_text, title)
        try:
            buf = io.StringIO()
            fig.savefig(buf, format="svg", metadata={"Date": None}, bbox_inches="tight")
        finally:
            plt.close(fig)
    return buf.getvalue()
