"""Projection result container and its CSV / self-drawn SVG scatter renderings."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import NamedTuple, Optional


class Point(NamedTuple):
    id: str
    group: Optional[str]
    x: float
    y: float


@dataclass
class ProjectionResult:
    points: list[Point]
    cluster: Optional[list[int]]
    stress: float
    method: str
    objective_trace: list[float] = field(default_factory=list)


# Ten well-separated scatter colors, cycled by cluster id / group index.
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def to_csv(result: ProjectionResult) -> str:
    """Columns id, group, x, y, cluster; floats are written in repr form so the
    file round-trips bit-exactly."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "group", "x", "y", "cluster"])
    for i, point in enumerate(result.points):
        cluster = "" if result.cluster is None else str(result.cluster[i])
        writer.writerow([point.id, point.group or "", repr(point.x), repr(point.y), cluster])
    return buf.getvalue()


def _color_for(result: ProjectionResult, index: int, group_order: dict) -> str:
    if result.cluster is not None:
        return PALETTE[result.cluster[index] % len(PALETTE)]
    group = result.points[index].group
    if group is not None and group in group_order:
        return PALETTE[group_order[group] % len(PALETTE)]
    return PALETTE[0]


def scatter_svg(result: ProjectionResult, width: int = 720, height: int = 540) -> str:
    """Standalone SVG scatter of the projected points; no external renderer.
    Points are colored by cluster when present, else by group."""
    margin = 40.0
    xs = [p.x for p in result.points]
    ys = [p.y for p in result.points]
    xmin, xmax = (min(xs), max(xs)) if xs else (0.0, 1.0)
    ymin, ymax = (min(ys), max(ys)) if ys else (0.0, 1.0)
    xpad = (xmax - xmin) * 0.05 or 1.0
    ypad = (ymax - ymin) * 0.05 or 1.0
    xmin, xmax = xmin - xpad, xmax + xpad
    ymin, ymax = ymin - ypad, ymax + ypad

    def sx(x):
        return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin)

    def sy(y):
        # SVG y axis points down.
        return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin)

    groups = sorted({p.group for p in result.points if p.group is not None})
    group_order = {g: i for i, g in enumerate(groups)}

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'  <rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'  <rect x="{margin:.1f}" y="{margin:.1f}" width="{width - 2 * margin:.1f}" '
        f'height="{height - 2 * margin:.1f}" fill="none" stroke="#cccccc"/>',
        f'  <text x="{margin:.1f}" y="{margin - 12:.1f}" font-family="sans-serif" '
        f'font-size="13">{result.method} projection ({len(result.points)} points, '
        f"stress={result.stress:.6f})</text>",
    ]
    for i, point in enumerate(result.points):
        color = _color_for(result, i, group_order)
        parts.append(
            f'  <circle cx="{sx(point.x):.2f}" cy="{sy(point.y):.2f}" r="4" '
            f'fill="{color}" fill-opacity="0.8"><title>{point.id}</title></circle>'
        )
    legend_items = (
        [(str(c), PALETTE[c % len(PALETTE)]) for c in sorted(set(result.cluster))]
        if result.cluster is not None
        else [(g, PALETTE[group_order[g] % len(PALETTE)]) for g in groups]
    )
    for row, (name, color) in enumerate(legend_items):
        y = margin + 14 + row * 16
        parts.append(f'  <circle cx="{width - margin - 90:.1f}" cy="{y:.1f}" r="5" fill="{color}"/>')
        parts.append(
            f'  <text x="{width - margin - 80:.1f}" y="{y + 4:.1f}" font-family="sans-serif" '
            f'font-size="11">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
