"""Minimal standalone SVG line and scatter plots.

Output is a pure function of the input: coordinates are printed with a fixed
number of decimals and elements are emitted in input order, so the same data
always gives the same bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .numerics import ParameterError

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


@dataclass(frozen=True)
class PlotStyle:
    width: int = 640
    height: int = 400
    margin: int = 48
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    hlines: tuple[float, ...] = field(default_factory=tuple)
    radius: float = 2.0


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _bounds(values: np.ndarray, extra: Sequence[float] = ()) -> tuple[float, float]:
    v = np.concatenate([values[np.isfinite(values)], np.asarray(extra, dtype=float)])
    if v.size == 0:
        return 0.0, 1.0
    lo, hi = float(v.min()), float(v.max())
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.04 * (hi - lo)
    return lo - pad, hi + pad


class _Canvas:
    def __init__(self, style: PlotStyle, xr: tuple[float, float], yr: tuple[float, float]):
        self.s, self.xr, self.yr = style, xr, yr
        self.parts: list[str] = []

    def x(self, v: float) -> float:
        s = self.s
        return s.margin + (v - self.xr[0]) / (self.xr[1] - self.xr[0]) * (s.width - 2 * s.margin)

    def y(self, v: float) -> float:
        s = self.s
        return s.height - s.margin - (v - self.yr[0]) / (self.yr[1] - self.yr[0]) * (s.height - 2 * s.margin)

    def frame(self, classes: Mapping[str, str]) -> None:
        s = self.s
        css = "".join(f".{name}{{{rule}}}" for name, rule in classes.items())
        self.parts.append(
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{s.width}" height="{s.height}" '
            f'viewBox="0 0 {s.width} {s.height}">')
        self.parts.append(f"<style>text{{font:11px sans-serif}}{css}</style>")
        self.parts.append(f'<rect x="0" y="0" width="{s.width}" height="{s.height}" fill="white"/>')
        self.parts.append(
            f'<rect x="{s.margin}" y="{s.margin}" width="{s.width - 2 * s.margin}" '
            f'height="{s.height - 2 * s.margin}" fill="none" stroke="black"/>')
        for v, anchor in ((self.xr[0], "start"), (self.xr[1], "end")):
            self.parts.append(f'<text x="{_fmt(self.x(v))}" y="{s.height - s.margin + 14}" '
                              f'text-anchor="{anchor}">{v:.4g}</text>')
        for v in self.yr:
            self.parts.append(f'<text x="{s.margin - 4}" y="{_fmt(self.y(v))}" text-anchor="end">{v:.4g}</text>')
        if s.title:
            self.parts.append(f'<text x="{s.width / 2}" y="{s.margin / 2}" text-anchor="middle">{escape(s.title)}</text>')
        if s.xlabel:
            self.parts.append(f'<text x="{s.width / 2}" y="{s.height - 8}" text-anchor="middle">{escape(s.xlabel)}</text>')
        if s.ylabel:
            self.parts.append(f'<text x="12" y="{s.height / 2}" text-anchor="middle" '
                              f'transform="rotate(-90 12 {s.height / 2})">{escape(s.ylabel)}</text>')

    def text(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def line_plot(xs: Sequence[float], series: Mapping[str, Sequence[float]], style: PlotStyle = PlotStyle()) -> str:
    """One polyline per named series over the shared x values."""
    x = np.asarray(xs, dtype=np.float64)
    if x.size == 0 or not series:
        raise ParameterError("line_plot needs at least one x value and one series")
    ys = {k: np.asarray(v, dtype=np.float64) for k, v in series.items()}
    for k, y in ys.items():
        if y.shape != x.shape:
            raise ParameterError(f"series {k!r} has {y.size} values for {x.size} x positions")
    cv = _Canvas(style, _bounds(x), _bounds(np.concatenate(list(ys.values())), style.hlines))
    classes = {f"s{i}": f"fill:none;stroke:{PALETTE[i % len(PALETTE)]};stroke-width:1.5" for i in range(len(ys))}
    cv.frame(classes)
    for h in style.hlines:
        cv.parts.append(f'<line x1="{_fmt(cv.x(cv.xr[0]))}" x2="{_fmt(cv.x(cv.xr[1]))}" y1="{_fmt(cv.y(h))}" '
                        f'y2="{_fmt(cv.y(h))}" stroke="#999" stroke-dasharray="4 3"/>')
    for i, (name, y) in enumerate(ys.items()):
        pts = " ".join(f"{_fmt(cv.x(a))},{_fmt(cv.y(b))}" for a, b in zip(x, y) if np.isfinite(b))
        cv.parts.append(f'<polyline class="s{i}" points="{pts}"/>')
        cv.parts.append(f'<text x="{style.width - style.margin - 4}" y="{style.margin + 14 + 14 * i}" '
                        f'text-anchor="end" fill="{PALETTE[i % len(PALETTE)]}">{escape(name)}</text>')
    return cv.text()


def scatter_plot(points: np.ndarray, labels: Sequence[str], style: PlotStyle = PlotStyle()) -> str:
    """2-D points as circles; each distinct label gets its own fill class."""
    P = np.asarray(points, dtype=np.float64)
    if P.ndim != 2 or P.shape[1] != 2 or P.shape[0] == 0:
        raise ParameterError("scatter_plot needs a non-empty (n, 2) array")
    labels = [str(lab) for lab in labels]
    if len(labels) != P.shape[0]:
        raise ParameterError("one label per point required")
    kinds = list(dict.fromkeys(labels))
    cls = {k: f"c{i}" for i, k in enumerate(kinds)}
    cv = _Canvas(style, _bounds(P[:, 0]), _bounds(P[:, 1]))
    cv.frame({f"c{i}": f"fill:{PALETTE[i % len(PALETTE)]};fill-opacity:0.6" for i in range(len(kinds))})
    for (a, b), lab in zip(P, labels):
        cv.parts.append(f'<circle class="{cls[lab]}" cx="{_fmt(cv.x(a))}" cy="{_fmt(cv.y(b))}" r="{style.radius}"/>')
    for i, k in enumerate(kinds):
        cv.parts.append(f'<text x="{style.width - style.margin - 4}" y="{style.margin + 14 + 14 * i}" '
                        f'text-anchor="end" fill="{PALETTE[i % len(PALETTE)]}">{escape(k)}</text>')
    return cv.text()


@dataclass(frozen=True)
class SeriesData:
    xs: Sequence[float]
    series: Mapping[str, Sequence[float]]


@dataclass(frozen=True)
class ScatterData:
    points: np.ndarray
    labels: Sequence[str]


def render(data, style: PlotStyle = PlotStyle()) -> str:
    if isinstance(data, SeriesData):
        return line_plot(data.xs, data.series, style)
    if isinstance(data, ScatterData):
        return scatter_plot(data.points, data.labels, style)
    raise ParameterError(f"cannot plot {type(data).__name__}")


def emit_svg(data, style: PlotStyle, path) -> None:
    """Render and write; an unwritable path raises OSError."""
    text = render(data, style)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
