"""Minimal self-contained SVG charts (bar and line) for experiment output.

The CSV files are the source of truth; these charts are a convenience and
are written with fixed number formatting so they are deterministic too.
"""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

__all__ = ["bar_chart", "line_chart"]

WIDTH, HEIGHT = 640, 400
MARGIN = dict(left=60, right=20, top=40, bottom=50)
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"]


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 10))
        t += step
    return ticks


class _Frame:
    def __init__(self, xlim, ylim):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.x1 <= self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 <= self.y0:
            self.y1 = self.y0 + 1.0
        self.pw = WIDTH - MARGIN["left"] - MARGIN["right"]
        self.ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(self, x):
        return MARGIN["left"] + (x - self.x0) / (self.x1 - self.x0) * self.pw

    def sy(self, y):
        return MARGIN["top"] + (1.0 - (y - self.y0) / (self.y1 - self.y0)) * self.ph


def _axes(f: _Frame, title: str, xlabel: str, ylabel: str, xticks=None) -> list[str]:
    out = [
        f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-size="16">{escape(title)}</text>',
        f'<line x1="{_fmt(f.sx(f.x0))}" y1="{_fmt(f.sy(f.y0))}" x2="{_fmt(f.sx(f.x1))}" y2="{_fmt(f.sy(f.y0))}" stroke="black"/>',
        f'<line x1="{_fmt(f.sx(f.x0))}" y1="{_fmt(f.sy(f.y0))}" x2="{_fmt(f.sx(f.x0))}" y2="{_fmt(f.sy(f.y1))}" stroke="black"/>',
    ]
    for t in xticks if xticks is not None else _nice_ticks(f.x0, f.x1):
        x = _fmt(f.sx(t))
        out.append(f'<text x="{x}" y="{_fmt(f.sy(f.y0) + 18)}" text-anchor="middle" font-size="11">{t:g}</text>')
    for t in _nice_ticks(f.y0, f.y1):
        y = _fmt(f.sy(t))
        out.append(f'<text x="{MARGIN["left"] - 6}" y="{y}" text-anchor="end" font-size="11">{t:g}</text>')
        out.append(f'<line x1="{MARGIN["left"]}" y1="{y}" x2="{WIDTH - MARGIN["right"]}" y2="{y}" stroke="#ddd"/>')
    out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 10}" text-anchor="middle" font-size="13">{escape(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{HEIGHT / 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 16 {HEIGHT / 2})">{escape(ylabel)}</text>'
    )
    return out


def _write(path, body: list[str]) -> None:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">'
    )
    with open(path, "w") as fh:
        fh.write("\n".join([head, f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>', *body, "</svg>"]) + "\n")


def bar_chart(path, xs: Sequence[int], heights: Sequence[float], title: str = "", xlabel: str = "", ylabel: str = "") -> None:
    """Bars of unit width centred on integer ``xs``."""
    if len(xs) == 0:
        xs, heights = [0], [0]
    f = _Frame((min(xs) - 0.5, max(xs) + 0.5), (0.0, max(max(heights), 1)))
    ticks = sorted(set(xs)) if len(xs) <= 15 else None
    body = _axes(f, title, xlabel, ylabel, ticks)
    for x, h in zip(xs, heights):
        left, right = f.sx(x - 0.4), f.sx(x + 0.4)
        top, base = f.sy(h), f.sy(0.0)
        body.append(
            f'<rect x="{_fmt(left)}" y="{_fmt(top)}" width="{_fmt(right - left)}" '
            f'height="{_fmt(base - top)}" fill="{PALETTE[0]}"/>'
        )
    _write(path, body)


def line_chart(
    path,
    series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    hlines: Sequence[tuple[str, float]] = (),
    ylim: tuple[float, float] | None = None,
) -> None:
    """Polylines ``(label, xs, ys)`` plus optional dashed horizontal guides."""
    allx = [x for _, xs, _ in series for x in xs] or [0.0, 1.0]
    ally = [y for _, _, ys in series for y in ys] + [v for _, v in hlines] or [0.0, 1.0]
    if ylim is None:
        ylim = (min(0.0, min(ally)), max(ally) * 1.05 if max(ally) > 0 else 1.0)
    f = _Frame((min(allx), max(allx)), ylim)
    body = _axes(f, title, xlabel, ylabel)
    for i, (label, v) in enumerate(hlines):
        y = _fmt(f.sy(v))
        body.append(
            f'<line x1="{MARGIN["left"]}" y1="{y}" x2="{WIDTH - MARGIN["right"]}" y2="{y}" '
            f'stroke="{PALETTE[(i + 3) % len(PALETTE)]}" stroke-dasharray="6 4"/>'
        )
    for i, (label, xs, ys) in enumerate(series):
        pts = " ".join(f"{_fmt(f.sx(x))},{_fmt(f.sy(y))}" for x, y in zip(xs, ys))
        body.append(f'<polyline points="{pts}" fill="none" stroke="{PALETTE[i % len(PALETTE)]}" stroke-width="1.5"/>')
    legend = [(lab, PALETTE[i % len(PALETTE)], "") for i, (lab, _, _) in enumerate(series)]
    legend += [(lab, PALETTE[(i + 3) % len(PALETTE)], ' stroke-dasharray="6 4"') for i, (lab, _) in enumerate(hlines)]
    for j, (label, color, dash) in enumerate(legend[:12]):
        y = MARGIN["top"] + 12 + 16 * j
        x = WIDTH - MARGIN["right"] - 150
        body.append(f'<line x1="{x}" y1="{y}" x2="{x + 20}" y2="{y}" stroke="{color}" stroke-width="2"{dash}/>')
        body.append(f'<text x="{x + 26}" y="{y + 4}" font-size="11">{escape(label)}</text>')
    _write(path, body)
