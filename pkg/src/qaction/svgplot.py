"""Self-contained SVG scatter and line plots (no plotting dependency).

Output is deterministic for fixed input: coordinates are formatted with
fixed precision and no timestamps or random identifiers are embedded.
"""

from __future__ import annotations

import math

WIDTH, HEIGHT = 640, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 72, 24, 44, 56
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"]


def _nice_ticks(lo: float, hi: float, target: int = 5):
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return [0.0]
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks or [lo]


def _fmt(v: float) -> str:
    return f"{v:.6g}"


class _Canvas:
    def __init__(self, title, xlabel, ylabel, xlim, ylim):
        self.parts = []
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.x1 <= self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 <= self.y0:
            self.y1 = self.y0 + 1.0
        self.parts.append(
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">')
        self.parts.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
        self._axes(title, xlabel, ylabel)

    def sx(self, x: float) -> float:
        frac = (x - self.x0) / (self.x1 - self.x0)
        return MARGIN_L + frac * (WIDTH - MARGIN_L - MARGIN_R)

    def sy(self, y: float) -> float:
        frac = (y - self.y0) / (self.y1 - self.y0)
        return HEIGHT - MARGIN_B - frac * (HEIGHT - MARGIN_T - MARGIN_B)

    def _axes(self, title, xlabel, ylabel):
        left, right = MARGIN_L, WIDTH - MARGIN_R
        top, bottom = MARGIN_T, HEIGHT - MARGIN_B
        self.parts.append(
            f'<rect x="{left}" y="{top}" width="{right-left}" height="{bottom-top}" '
            'fill="none" stroke="black" stroke-width="1"/>')
        for t in _nice_ticks(self.x0, self.x1):
            if t < self.x0 - 1e-12 or t > self.x1 + 1e-12:
                continue
            px = self.sx(t)
            self.parts.append(
                f'<line x1="{px:.2f}" y1="{bottom}" x2="{px:.2f}" y2="{bottom+5}" stroke="black"/>')
            self.parts.append(
                f'<text x="{px:.2f}" y="{bottom+20}" font-size="12" text-anchor="middle" '
                f'font-family="sans-serif">{_fmt(t)}</text>')
        for t in _nice_ticks(self.y0, self.y1):
            if t < self.y0 - 1e-12 or t > self.y1 + 1e-12:
                continue
            py = self.sy(t)
            self.parts.append(
                f'<line x1="{left-5}" y1="{py:.2f}" x2="{left}" y2="{py:.2f}" stroke="black"/>')
            self.parts.append(
                f'<text x="{left-8}" y="{py+4:.2f}" font-size="12" text-anchor="end" '
                f'font-family="sans-serif">{_fmt(t)}</text>')
        self.parts.append(
            f'<text x="{(left+right)/2:.1f}" y="{MARGIN_T-14}" font-size="15" text-anchor="middle" '
            f'font-family="sans-serif">{title}</text>')
        self.parts.append(
            f'<text x="{(left+right)/2:.1f}" y="{HEIGHT-14}" font-size="13" text-anchor="middle" '
            f'font-family="sans-serif">{xlabel}</text>')
        self.parts.append(
            f'<text x="18" y="{(top+bottom)/2:.1f}" font-size="13" text-anchor="middle" '
            f'font-family="sans-serif" transform="rotate(-90 18 {(top+bottom)/2:.1f})">{ylabel}</text>')

    def legend(self, labels_colors):
        x = WIDTH - MARGIN_R - 150
        y = MARGIN_T + 16
        for label, color in labels_colors:
            self.parts.append(f'<circle cx="{x}" cy="{y-4}" r="4" fill="{color}"/>')
            self.parts.append(
                f'<text x="{x+10}" y="{y}" font-size="12" font-family="sans-serif">{label}</text>')
            y += 16

    def finish(self) -> str:
        self.parts.append("</svg>")
        return "\n".join(self.parts)


def _limits(arrays, pad=0.05):
    lo = min(float(min(a)) for a in arrays if len(a))
    hi = max(float(max(a)) for a in arrays if len(a))
    span = (hi - lo) or 1.0
    return lo - pad * span, hi + pad * span


def scatter_svg(path, groups, title="", xlabel="x", ylabel="y", radius=1.3):
    """groups: list of dicts with keys x, y and optional color, label."""
    xs = [g["x"] for g in groups if len(g["x"])]
    ys = [g["y"] for g in groups if len(g["y"])]
    if not xs:
        raise ValueError("nothing to plot")
    canvas = _Canvas(title, xlabel, ylabel, _limits(xs), _limits(ys))
    legend = []
    for i, g in enumerate(groups):
        color = g.get("color") or PALETTE[i % len(PALETTE)]
        if g.get("label"):
            legend.append((g["label"], color))
        dots = [
            f'<circle cx="{canvas.sx(float(x)):.2f}" cy="{canvas.sy(float(y)):.2f}" '
            f'r="{radius}" fill="{color}" fill-opacity="0.7"/>'
            for x, y in zip(g["x"], g["y"])
        ]
        canvas.parts.extend(dots)
    if legend:
        canvas.legend(legend)
    with open(path, "w") as fh:
        fh.write(canvas.finish())


def line_svg(path, series, title="", xlabel="x", ylabel="y"):
    """series: list of dicts with keys x, y and optional color, label."""
    xs = [s["x"] for s in series if len(s["x"])]
    ys = [s["y"] for s in series if len(s["y"])]
    if not xs:
        raise ValueError("nothing to plot")
    canvas = _Canvas(title, xlabel, ylabel, _limits(xs), _limits(ys))
    legend = []
    for i, s in enumerate(series):
        color = s.get("color") or PALETTE[i % len(PALETTE)]
        if s.get("label"):
            legend.append((s["label"], color))
        pts = " ".join(
            f"{canvas.sx(float(x)):.2f},{canvas.sy(float(y)):.2f}"
            for x, y in zip(s["x"], s["y"]))
        canvas.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.6"/>')
        marks = [
            f'<circle cx="{canvas.sx(float(x)):.2f}" cy="{canvas.sy(float(y)):.2f}" '
            f'r="2.5" fill="{color}"/>'
            for x, y in zip(s["x"], s["y"])
        ]
        canvas.parts.extend(marks)
    if legend:
        canvas.legend(legend)
    with open(path, "w") as fh:
        fh.write(canvas.finish())
