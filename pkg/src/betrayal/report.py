"""CSV tables and small static SVG charts for run reports."""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from typing import Sequence
from xml.sax.saxutils import escape

from .lingcues import CUE_LABELS, CUE_NAMES

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
W, H = 480, 320
PAD_L, PAD_R, PAD_T, PAD_B = 56, 120, 32, 44


def rows_to_csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c, "")) for c in columns])
    return buf.getvalue()


def _cell(v):
    return repr(v) if isinstance(v, float) else v


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi == lo:
        return [lo]
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def line_chart(
    series: dict[str, list[tuple[float, float, float]]],
    title: str,
    xlabel: str,
    ylabel: str,
    reverse_x: bool = False,
) -> str:
    """Lines with +/- one-SE whiskers; ``series`` maps label -> [(x, y, se)]."""
    pts = [p for s in series.values() for p in s]
    xs = [p[0] for p in pts] or [0.0]
    lows = [p[1] - p[2] for p in pts] or [0.0]
    highs = [p[1] + p[2] for p in pts] or [1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(lows), max(highs)
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 0.5, y1 + 0.5
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    pw, ph = W - PAD_L - PAD_R, H - PAD_T - PAD_B

    def sx(x):
        f = (x - x0) / (x1 - x0)
        return PAD_L + (1 - f if reverse_x else f) * pw

    def sy(y):
        return PAD_T + (1 - (y - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.0f}" y="18" text-anchor="middle" font-family="sans-serif" font-size="13">{escape(title)}</text>',
        f'<line x1="{PAD_L}" y1="{PAD_T + ph}" x2="{PAD_L + pw}" y2="{PAD_T + ph}" stroke="black"/>',
        f'<line x1="{PAD_L}" y1="{PAD_T}" x2="{PAD_L}" y2="{PAD_T + ph}" stroke="black"/>',
    ]
    for t in _ticks(y0, y1):
        out.append(f'<text x="{PAD_L - 4}" y="{_fmt(sy(t) + 4)}" text-anchor="end" font-family="sans-serif" '
                   f'font-size="10">{t:.3g}</text>')
    for x in sorted(set(xs)):
        out.append(f'<text x="{_fmt(sx(x))}" y="{PAD_T + ph + 14}" text-anchor="middle" font-family="sans-serif" '
                   f'font-size="10">{x:g}</text>')
    out.append(f'<text x="{PAD_L + pw / 2:.0f}" y="{H - 8}" text-anchor="middle" font-family="sans-serif" '
               f'font-size="11">{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{PAD_T + ph / 2:.0f}" text-anchor="middle" font-family="sans-serif" font-size="11" '
               f'transform="rotate(-90 14 {PAD_T + ph / 2:.0f})">{escape(ylabel)}</text>')
    for k, (label, s) in enumerate(series.items()):
        color = _PALETTE[k % len(_PALETTE)]
        s = sorted(s)
        if len(s) > 1:
            path = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y, _ in s)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for x, y, se in s:
            out.append(f'<line x1="{_fmt(sx(x))}" y1="{_fmt(sy(y - se))}" x2="{_fmt(sx(x))}" y2="{_fmt(sy(y + se))}" '
                       f'stroke="{color}"/>')
            out.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="2.5" fill="{color}"/>')
        ly = PAD_T + 14 * k + 6
        out.append(f'<line x1="{W - PAD_R + 8}" y1="{ly}" x2="{W - PAD_R + 24}" y2="{ly}" stroke="{color}" '
                   f'stroke-width="2"/>')
        out.append(f'<text x="{W - PAD_R + 28}" y="{ly + 4}" font-family="sans-serif" font-size="10">'
                   f'{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def bar_chart(items: Sequence[tuple[str, float]], title: str) -> str:
    """Horizontal bars for signed values (e.g. model coefficients)."""
    n = max(1, len(items))
    row = 18
    height = PAD_T + row * n + 20
    width = 560
    mid = 330
    span = max([abs(v) for _, v in items] + [1e-12])
    half = 200
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.0f}" y="18" text-anchor="middle" font-family="sans-serif" font-size="13">'
        f'{escape(title)}</text>',
        f'<line x1="{mid}" y1="{PAD_T - 4}" x2="{mid}" y2="{PAD_T + row * n}" stroke="black"/>',
    ]
    for i, (name, v) in enumerate(items):
        y = PAD_T + i * row
        L = abs(v) / span * half
        x = mid if v >= 0 else mid - L
        color = _PALETTE[0] if v >= 0 else _PALETTE[1]
        out.append(f'<rect x="{_fmt(x)}" y="{y}" width="{_fmt(L)}" height="{row - 4}" fill="{color}"/>')
        out.append(f'<text x="{mid - half - 6}" y="{y + row - 7}" text-anchor="end" font-family="sans-serif" '
                   f'font-size="10">{escape(name)} ({v:+.3f})</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


CURVE_COLUMNS = ["group", "t", "role", "cue", "mean", "se", "n"]


def curve_charts(curves: Sequence[dict]) -> dict[str, str]:
    """One SVG per cue: mean by relative season for every group and role."""
    by_cue: dict[str, dict[str, list]] = defaultdict(lambda: defaultdict(list))
    for r in curves:
        by_cue[r["cue"]][f"{r['group']} {r['role']}"].append((float(r["t"]), r["mean"], r["se"]))
    charts = {}
    for cue in CUE_NAMES:
        if cue not in by_cue:
            continue
        series = {k: by_cue[cue][k] for k in sorted(by_cue[cue])}
        charts[f"curve_{cue}.svg"] = line_chart(
            series, CUE_LABELS[cue], "seasons before the last friendly act (t)", "mean per season", reverse_x=True
        )
    return charts
