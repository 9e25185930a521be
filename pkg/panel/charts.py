#!/usr/bin/env python3
"""
SVG chart emitters: PMC-Surface heatmap, spider web, G trend and keyword dendrogram.

Output bytes are deterministic for a given spec: fixed hash salt, no date
metadata, text kept as <text> elements. Labelled artists carry ids
(cell-R-C, vertex-K, point-K) so the numbers can be read back from the file.
"""

import io
import logging
import math
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Any, List, Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Polygon, Rectangle  # noqa: E402
from scipy.cluster.hierarchy import dendrogram as scipy_dendrogram  # noqa: E402

from core.coword import Dendrogram, to_linkage  # noqa: E402
from core.errors import ReportError  # noqa: E402
from core.pmc import LEVELS, display  # noqa: E402
from services.storage import atomic_write_text  # noqa: E402

logger = logging.getLogger(__name__)

KINDS = ("surface-heatmap", "spider", "trend")

SVG_STYLE = {
    "svg.hashsalt": "pmc-pipeline",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
}


@dataclass(frozen=True)
class ChartSpec:
    kind: str
    title: str
    data: Any
    output_path: Union[str, Path]


def _save(fig, path: Union[str, Path]) -> Path:
    buffer = io.BytesIO()
    fig.savefig(buffer, format="svg", metadata={"Date": None})
    plt.close(fig)
    return atomic_write_text(path, buffer.getvalue().decode("utf-8"))


def _check_kind(spec: ChartSpec, kind: str):
    if spec.kind != kind:
        raise ReportError(f"expected a {kind} chart spec, got {spec.kind!r}")


def render_surface(spec: ChartSpec) -> Path:
    """3x3 heatmap, linear colour scale on [0, 1], value printed in every cell."""
    _check_kind(spec, "surface-heatmap")
    grid = [list(map(float, row)) for row in spec.data]
    if len(grid) != 3 or any(len(row) != 3 for row in grid):
        raise ReportError("surface data must be a 3x3 matrix")
    if any(not 0.0 <= v <= 1.0 for row in grid for v in row):
        raise ReportError("surface values must lie in [0, 1]")

    with plt.rc_context(SVG_STYLE):
        fig, ax = plt.subplots(figsize=(5, 5))
        cmap = plt.get_cmap("Blues")
        for r, row in enumerate(grid):
            for c, value in enumerate(row):
                ax.add_patch(Rectangle(
                    (c, 2 - r), 1, 1,
                    facecolor=cmap(value), edgecolor="white", linewidth=2,
                    gid=f"rect-{r}-{c}",
                ))
                ax.text(
                    c + 0.5, 2 - r + 0.5, display(value),
                    ha="center", va="center", fontsize=14,
                    color="white" if value > 0.6 else "black",
                    gid=f"cell-{r}-{c}",
                )
                ax.text(c + 0.08, 2 - r + 0.88, f"P{3 * r + c + 1}", fontsize=8, color="grey")
        ax.set_xlim(0, 3)
        ax.set_ylim(0, 3)
        ax.set_aspect("equal")
        ax.axis("off")
        ax.set_title(spec.title)
        return _save(fig, spec.output_path)


def spider_vertices(values: Sequence[float]) -> List[Tuple[float, float]]:
    """Vertex k sits at radius values[k] and angle 2*pi*k/n - pi/2."""
    n = len(values)
    return [
        (r * math.cos(2 * math.pi * k / n - math.pi / 2), r * math.sin(2 * math.pi * k / n - math.pi / 2))
        for k, r in enumerate(values)
    ]


def render_spider(spec: ChartSpec) -> Path:
    """data: ordered (axis label, value) pairs, one per main variable."""
    _check_kind(spec, "spider")
    axes = [(str(label), float(value)) for label, value in spec.data]
    if len(axes) < 3:
        raise ReportError("spider chart needs at least 3 axes")
    labels = [label for label, _ in axes]
    values = [value for _, value in axes]

    with plt.rc_context(SVG_STYLE):
        fig, ax = plt.subplots(figsize=(6, 6))
        for ring in (0.25, 0.5, 0.75, 1.0):
            ax.add_patch(Polygon(spider_vertices([ring] * len(axes)), closed=True,
                                 fill=False, edgecolor="lightgrey", linewidth=0.8))
        for (x, y), label in zip(spider_vertices([1.12] * len(axes)), labels):
            ax.plot([0, x / 1.12], [0, y / 1.12], color="lightgrey", linewidth=0.8)
            ax.text(x, y, label, ha="center", va="center", fontsize=10)

        vertices = spider_vertices(values)
        ax.add_patch(Polygon(vertices, closed=True, facecolor="tab:blue", alpha=0.25,
                             edgecolor="tab:blue", linewidth=2, gid="polygon"))
        for k, ((x, y), value) in enumerate(zip(vertices, values)):
            ax.plot([x], [y], marker="o", color="tab:blue", markersize=4)
            ax.text(x, y, display(value), fontsize=8, ha="left", va="bottom", gid=f"vertex-{k}")

        ax.set_xlim(-1.3, 1.3)
        ax.set_ylim(-1.3, 1.3)
        # first axis at the top
        ax.invert_yaxis()
        ax.set_aspect("equal")
        ax.axis("off")
        ax.set_title(spec.title)
        return _save(fig, spec.output_path)


def _decimal_year(when: date) -> float:
    return when.year + (when.month - 1) / 12 + (when.day - 1) / 365


def render_trend(spec: ChartSpec) -> Path:
    """data: (release date, G) pairs; x is the release year, y is G on [0, 10]."""
    _check_kind(spec, "trend")
    points = sorted((when, float(g)) for when, g in spec.data)
    if len(points) < 2:
        raise ReportError("trend chart needs at least 2 points")
    dates = [when for when, _ in points]
    if len(set(dates)) != len(dates):
        duplicated = sorted({d.isoformat() for d in dates if dates.count(d) > 1})
        raise ReportError(f"duplicate dates in trend series: {', '.join(duplicated)}")

    xs = [_decimal_year(when) for when in dates]
    ys = [g for _, g in points]

    with plt.rc_context(SVG_STYLE):
        fig, ax = plt.subplots(figsize=(10, 5))
        for level in LEVELS:
            if level.low > 0:
                ax.axhline(level.low, color="lightgrey", linestyle="--", linewidth=0.8)
        ax.plot(xs, ys, color="tab:red", marker="o", linewidth=2, gid="trend-line")
        for k, (x, y) in enumerate(zip(xs, ys)):
            ax.text(x, y + 0.25, display(y), ha="center", fontsize=8, gid=f"point-{k}")
        years = sorted({when.year for when in dates})
        ax.set_xticks(years)
        ax.set_xticklabels([str(y) for y in years], rotation=45)
        ax.set_ylim(0, 10)
        ax.set_xlabel("Release year")
        ax.set_ylabel("G")
        ax.set_title(spec.title)
        fig.tight_layout()
        return _save(fig, spec.output_path)


def render_dendrogram(tree: Dendrogram, path: Union[str, Path], title: str = "Keyword clusters") -> Path:
    if len(tree.leaves) < 2:
        raise ReportError("dendrogram needs at least 2 leaves")
    with plt.rc_context(SVG_STYLE):
        fig, ax = plt.subplots(figsize=(8, max(3, 0.3 * len(tree.leaves))))
        scipy_dendrogram(to_linkage(tree), labels=list(tree.leaves), orientation="right", ax=ax)
        ax.set_xlabel("1 - cosine (average linkage)")
        ax.set_title(title)
        fig.tight_layout()
        return _save(fig, path)


RENDERERS = {
    "surface-heatmap": render_surface,
    "spider": render_spider,
    "trend": render_trend,
}


def render(spec: ChartSpec) -> Path:
    if spec.kind not in RENDERERS:
        raise ReportError(f"unknown chart kind {spec.kind!r}")
    path = RENDERERS[spec.kind](spec)
    logger.info("Rendered %s chart %s", spec.kind, path)
    return path
