"""Deterministic report emitters: rank tables, glyph plots, scatter plots.

Every emitter is a pure function of its inputs and produces byte-identical
output for identical input: fixed float formatting, no timestamps, no
external resources.  SVG output is well-formed standalone SVG 1.1; the
rank table is self-contained HTML with a plain CSV twin.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

_PALETTE = (
    "#c0392b", "#2471a3", "#229954", "#b7950b", "#884ea0",
    "#17a589", "#d35400", "#5d6d7e", "#a93226", "#1f618d",
)


@dataclass(frozen=True)
class GlyphSpec:
    """Radar-plot input: one spoke per label, one closed series per method."""

    spokes: tuple[str, ...]
    series: tuple[tuple[str, tuple[float, ...]], ...]

    def __post_init__(self):
        if len(self.spokes) < 3:
            raise ValueError("a glyph plot needs at least 3 spokes")
        for name, values in self.series:
            if len(values) != len(self.spokes):
                raise ValueError(f"series {name!r} length does not match spoke count")
            if not all(math.isfinite(v) for v in values):
                raise ValueError(f"series {name!r} contains non-finite values")


def _fmt(x: float) -> str:
    return f"{x:.3f}".rstrip("0").rstrip(".")


def _svg_open(width: int, height: int) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">'
    ]


# ---------------------------------------------------------------------------
# color-coded rank table
# ---------------------------------------------------------------------------

def _cell_color(value: float, lo: float, hi: float) -> str:
    """Linear red -> white -> blue over [lo, hi]; white when degenerate."""
    if hi <= lo:
        return "#ffffff"
    mid = 0.5 * (lo + hi)
    if value <= mid:
        t = (value - lo) / (mid - lo) if mid > lo else 1.0
        g = b = round(255 * t)
        return f"#ff{g:02x}{b:02x}"
    t = (hi - value) / (hi - mid)
    r = g = round(255 * t)
    return f"#{r:02x}{g:02x}ff"


def emit_rank_table(rows, out_path) -> tuple[Path, Path]:
    """Write the selector rank table as styled HTML plus a CSV twin.

    ``rows`` come from stats.selector_rank_table: one dict per
    (classifier, ranker) pair with per-selector average ranks and the
    best-group selector set.  Cell shading spans each classifier's block
    of rows; best-group members get a solid border.
    """
    out_path = Path(out_path)
    csv_path = out_path.with_suffix(".csv")
    if not rows:
        raise ValueError("no rank rows to emit")
    selectors = rows[0]["selectors"]
    block_range = {}
    for row in rows:
        values = list(row["avg_ranks"].values())
        lo, hi = block_range.get(row["classifier"], (math.inf, -math.inf))
        block_range[row["classifier"]] = (min(lo, *values), max(hi, *values))
    html = [
        "<!DOCTYPE html>",
        "<html><head><meta charset=\"utf-8\"><title>selector ranks</title></head><body>",
        '<table style="border-collapse:collapse;font-family:sans-serif;font-size:13px">',
        "<tr><th>classifier</th><th>ranker</th>"
        + "".join(f'<th style="padding:4px 8px">{s}</th>' for s in selectors)
        + "</tr>",
    ]
    csv_lines = ["classifier,ranker," + ",".join(selectors) + ",best_group"]
    for row in rows:
        lo, hi = block_range[row["classifier"]]
        cells = []
        for s in selectors:
            v = row["avg_ranks"].get(s)
            if v is None:
                warnings.warn(f"missing rank cell {row['classifier']}/{row['ranker']}/{s}")
                cells.append('<td style="border:1px solid #bbb;padding:4px 8px"></td>')
                continue
            color = _cell_color(v, lo, hi)
            border = "2px solid #000" if s in row["best_group"] else "1px solid #bbb"
            cells.append(
                f'<td style="background:{color};border:{border};padding:4px 8px;'
                f'text-align:center">{v:.2f}</td>'
            )
        html.append(
            f"<tr><td style=\"padding:4px 8px\">{row['classifier']}</td>"
            f"<td style=\"padding:4px 8px\">{row['ranker']}</td>" + "".join(cells) + "</tr>"
        )
        csv_lines.append(
            f"{row['classifier']},{row['ranker']},"
            + ",".join(
                "" if row["avg_ranks"].get(s) is None else f"{row['avg_ranks'][s]:.4f}"
                for s in selectors
            )
            + ","
            + " ".join(sorted(row["best_group"]))
        )
    html.append("</table></body></html>")
    out_path.write_text("\n".join(html) + "\n", encoding="utf-8")
    csv_path.write_text("\n".join(csv_lines) + "\n", encoding="utf-8")
    return out_path, csv_path


# ---------------------------------------------------------------------------
# glyph (radar) plot
# ---------------------------------------------------------------------------

def emit_glyph_svg(spec: GlyphSpec, out_path) -> Path:
    """Write a radar chart; radius is linear in value (shared scale).

    The legend runs from the worst series (largest average value, largest
    polygon) to the best.
    """
    out_path = Path(out_path)
    size = 640
    cx = cy = size / 2
    radius = 230.0
    top = max(max(values) for _, values in spec.series)
    scale = radius / top if top > 0 else 1.0
    n = len(spec.spokes)
    angles = [-math.pi / 2 + 2 * math.pi * i / n for i in range(n)]
    parts = _svg_open(size, size + 20 * len(spec.series))
    parts.append(f'<rect width="100%" height="100%" fill="#ffffff"/>')
    for i, (label, ang) in enumerate(zip(spec.spokes, angles)):
        x = cx + radius * math.cos(ang)
        y = cy + radius * math.sin(ang)
        parts.append(
            f'<line x1="{_fmt(cx)}" y1="{_fmt(cy)}" x2="{_fmt(x)}" y2="{_fmt(y)}" '
            f'stroke="#cccccc" stroke-width="1"/>'
        )
        lx = cx + (radius + 12) * math.cos(ang)
        ly = cy + (radius + 12) * math.sin(ang)
        anchor = "middle" if abs(math.cos(ang)) < 0.3 else ("start" if math.cos(ang) > 0 else "end")
        parts.append(
            f'<text x="{_fmt(lx)}" y="{_fmt(ly)}" font-size="11" font-family="sans-serif" '
            f'text-anchor="{anchor}">{label}</text>'
        )
    ordered = sorted(
        spec.series, key=lambda item: (-sum(item[1]) / len(item[1]), item[0])
    )
    for si, (name, values) in enumerate(ordered):
        color = _PALETTE[si % len(_PALETTE)]
        pts = []
        for v, ang in zip(values, angles):
            r = v * scale
            pts.append(f"{_fmt(cx + r * math.cos(ang))},{_fmt(cy + r * math.sin(ang))}")
        parts.append(
            f'<polygon points="{" ".join(pts)}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        ly = size + 14 + 20 * si
        parts.append(f'<line x1="20" y1="{ly - 4}" x2="44" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(
            f'<text x="50" y="{ly}" font-size="12" font-family="sans-serif">{name}</text>'
        )
    parts.append("</svg>")
    out_path.write_text("\n".join(parts) + "\n", encoding="utf-8")
    return out_path


# ---------------------------------------------------------------------------
# estimate-vs-truth scatter panels
# ---------------------------------------------------------------------------

def emit_scatter_svg(panels, out_path) -> Path:
    """Write side-by-side scatter panels of estimated vs true error.

    ``panels``: sequence of (label, estimates, truths, annotation); both
    error axes span [0, 1] and each panel draws the identity diagonal.
    """
    out_path = Path(out_path)
    if not panels:
        raise ValueError("no scatter panels to emit")
    side, margin, gap = 300, 44, 28
    width = margin + len(panels) * (side + gap)
    height = side + 2 * margin
    parts = _svg_open(width, height)
    parts.append('<rect width="100%" height="100%" fill="#ffffff"/>')
    for pi, (label, est, truth, note) in enumerate(panels):
        est = np.asarray(est, dtype=np.float64)
        truth = np.asarray(truth, dtype=np.float64)
        if est.shape != truth.shape or est.size == 0:
            raise ValueError(f"panel {label!r} needs matching non-empty value arrays")
        x0 = margin + pi * (side + gap)
        y0 = margin
        parts.append(
            f'<rect x="{x0}" y="{y0}" width="{side}" height="{side}" fill="none" stroke="#333333"/>'
        )
        parts.append(
            f'<line x1="{x0}" y1="{y0 + side}" x2="{x0 + side}" y2="{y0}" '
            f'stroke="#999999" stroke-dasharray="4 3"/>'
        )
        for e, t in zip(est, truth):
            px = x0 + min(max(e, 0.0), 1.0) * side
            py = y0 + side - min(max(t, 0.0), 1.0) * side
            parts.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="2" fill="#2471a3" fill-opacity="0.5"/>')
        parts.append(
            f'<text x="{x0 + side / 2}" y="{y0 - 10}" font-size="13" font-family="sans-serif" '
            f'text-anchor="middle">{label}</text>'
        )
        parts.append(
            f'<text x="{x0 + 6}" y="{y0 + 16}" font-size="11" font-family="sans-serif">{note}</text>'
        )
        parts.append(
            f'<text x="{x0 + side / 2}" y="{y0 + side + 26}" font-size="11" '
            f'font-family="sans-serif" text-anchor="middle">estimate</text>'
        )
    parts.append(
        f'<text x="16" y="{margin + side / 2}" font-size="11" font-family="sans-serif" '
        f'transform="rotate(-90 16 {margin + side / 2})" text-anchor="middle">true error</text>'
    )
    parts.append("</svg>")
    out_path.write_text("\n".join(parts) + "\n", encoding="utf-8")
    return out_path


# ---------------------------------------------------------------------------
# sample-size curves
# ---------------------------------------------------------------------------

def emit_samplesize_curve_svg(rows, out_path) -> Path:
    """Line chart of required sample size N over p1, one series per alpha.

    ``rows`` are (p1, alpha, N) tuples as produced by sample_size_curve.
    """
    out_path = Path(out_path)
    if not rows:
        raise ValueError("no curve rows to emit")
    alphas = sorted({alpha for _, alpha, _ in rows})
    p1s = sorted({p1 for p1, _, _ in rows})
    n_max = max(n for _, _, n in rows)
    width, height, margin = 560, 420, 50
    plot_w, plot_h = width - 2 * margin, height - 2 * margin
    parts = _svg_open(width, height)
    parts.append('<rect width="100%" height="100%" fill="#ffffff"/>')
    parts.append(
        f'<rect x="{margin}" y="{margin}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#333333"/>'
    )
    span = max(p1s) - min(p1s) or 1.0
    for si, alpha in enumerate(alphas):
        pts = []
        for p1, a, n in rows:
            if a != alpha:
                continue
            x = margin + (p1 - min(p1s)) / span * plot_w
            y = margin + plot_h - n / n_max * plot_h
            pts.append(f"{_fmt(x)},{_fmt(y)}")
        color = _PALETTE[si % len(_PALETTE)]
        parts.append(f'<polyline points="{" ".join(pts)}" fill="none" stroke="{color}" stroke-width="2"/>')
        parts.append(
            f'<text x="{margin + 8}" y="{margin + 18 + 16 * si}" font-size="12" '
            f'font-family="sans-serif" fill="{color}">alpha={_fmt(alpha)}</text>'
        )
    parts.append(
        f'<text x="{width / 2}" y="{height - 12}" font-size="12" font-family="sans-serif" '
        f'text-anchor="middle">p1 (better feature correctness)</text>'
    )
    parts.append(
        f'<text x="16" y="{height / 2}" font-size="12" font-family="sans-serif" '
        f'transform="rotate(-90 16 {height / 2})" text-anchor="middle">required N (max {_fmt(n_max)})</text>'
    )
    parts.append("</svg>")
    out_path.write_text("\n".join(parts) + "\n", encoding="utf-8")
    return out_path
