"""Self-contained SVG figures: probability heatmaps and vote scatters.

Output is a pure function of the input data (fixed number formatting, no
ids or timestamps), so repeated renders are byte-identical. Overlay curves
live in a group whose transform maps data coordinates to pixels; their
points therefore carry exact data values.
"""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .cusp import fold_boundary_b
from .errors import RenderError

WIDTH, HEIGHT = 520, 420
LEFT, RIGHT, TOP, BOTTOM = 60, 20, 40, 50
CLASS_COLORS = {0: "#2166ac", 1: "#b2182b"}

FIGURES = {
    "fig1a": ("heatmap", "P(Y=1|A) from DB_A"),
    "fig1b": ("heatmap", "P(Y=1|B) from DB_B"),
    "fig1c": ("scatter", "Sampled votes with cusp curve"),
    "fig1d": ("heatmap", "P(Y=1|A,B) from joined DB_A, DB_B"),
    "fig2a": ("latent", "Bistability of latent X"),
    "fig2b": ("scatter", "Sampled votes, switching at |A|=1/2"),
}


def _f(v):
    return f"{v:.2f}"


def _ramp(p):
    # blue (p=0) -> white -> red (p=1)
    lo, mid, hi = np.array([33, 102, 172]), np.array([247, 247, 247]), np.array([178, 24, 43])
    p = min(max(float(p), 0.0), 1.0)
    c = lo + (mid - lo) * (p / 0.5) if p < 0.5 else mid + (hi - mid) * ((p - 0.5) / 0.5)
    return "#{:02x}{:02x}{:02x}".format(*(int(round(v)) for v in c))


class _Frame:
    def __init__(self, xlim, ylim):
        self.xlim, self.ylim = xlim, ylim
        self.w = WIDTH - LEFT - RIGHT
        self.h = HEIGHT - TOP - BOTTOM

    def px(self, x):
        return LEFT + (x - self.xlim[0]) / (self.xlim[1] - self.xlim[0]) * self.w

    def py(self, y):
        return TOP + (self.ylim[1] - y) / (self.ylim[1] - self.ylim[0]) * self.h

    def data_transform(self):
        sx = self.w / (self.xlim[1] - self.xlim[0])
        sy = -self.h / (self.ylim[1] - self.ylim[0])
        tx = LEFT - self.xlim[0] * sx
        ty = TOP - self.ylim[1] * sy
        return f"matrix({sx!r} 0 0 {sy!r} {tx!r} {ty!r})"

    def axes(self, xlabel, ylabel, ticks=5, xticks=None, yticks=None):
        out = [
            f'<g class="axes" stroke="#000" stroke-width="1">'
            f'<line x1="{LEFT}" y1="{TOP + self.h}" x2="{LEFT + self.w}" y2="{TOP + self.h}"/>'
            f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + self.h}"/></g>'
        ]
        for v in np.linspace(*(xticks or self.xlim), ticks):
            x = _f(self.px(v))
            out.append(
                f'<line class="tick" x1="{x}" y1="{TOP + self.h}" x2="{x}" y2="{TOP + self.h + 5}" stroke="#000"/>'
                f'<text class="tick-label" x="{x}" y="{TOP + self.h + 18}" text-anchor="middle">{v:g}</text>'
            )
        for v in np.linspace(*(yticks or self.ylim), ticks):
            y = _f(self.py(v))
            out.append(
                f'<line class="tick" x1="{LEFT - 5}" y1="{y}" x2="{LEFT}" y2="{y}" stroke="#000"/>'
                f'<text class="tick-label" x="{LEFT - 8}" y="{y}" text-anchor="end" dominant-baseline="middle">{v:g}</text>'
            )
        out.append(
            f'<text class="axis-label" x="{LEFT + self.w / 2:g}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>'
            f'<text class="axis-label" x="16" y="{TOP + self.h / 2:g}" text-anchor="middle" '
            f'transform="rotate(-90 16 {TOP + self.h / 2:g})">{escape(ylabel)}</text>'
        )
        return out


def cusp_curve_points(a_lim=(-1.0, 1.0), b_max=4.0, num=200):
    """(b, a) points tracing |a| = 2 (b/3)^(3/2), clipped to ``a_lim``.

    Runs along the lower branch from its clip point to the tip at the
    origin and back out along the upper branch.
    """
    a_cap = max(abs(a_lim[0]), abs(a_lim[1]))
    b_end = min(b_max, fold_boundary_b(a_cap))
    bs = np.linspace(0.0, b_end, num)
    upper = [(float(b), 2.0 * (float(b) / 3.0) ** 1.5) for b in bs]
    lower = [(b, -a) for b, a in reversed(upper[1:])]
    return lower + upper


def _cusp_overlay(frame, a_lim, b_max):
    pts = " ".join(f"{b!r},{a!r}" for b, a in cusp_curve_points(a_lim, b_max))
    return (
        f'<g transform="{frame.data_transform()}">'
        f'<polyline class="cusp-curve" points="{pts}" fill="none" stroke="#000" '
        f'stroke-width="2" vector-effect="non-scaling-stroke"/></g>'
    )


def _switch_lines(frame):
    b = fold_boundary_b(0.5)
    y0, y1 = frame.ylim
    return (
        f'<g transform="{frame.data_transform()}">'
        f'<line class="switch-line" x1="{b!r}" y1="{y0!r}" x2="{b!r}" y2="{y1!r}" stroke="#333" '
        f'stroke-dasharray="6 4" vector-effect="non-scaling-stroke"/>'
        f'<line class="switch-mark" x1="{b!r}" y1="0.5" x2="{b!r}" y2="-0.5" stroke="#333" '
        f'stroke-dasharray="2 2" vector-effect="non-scaling-stroke"/></g>'
    )


def _heatmap(grid, frame):
    p = np.asarray(grid.p)
    if p.size == 0:
        raise RenderError("empty probability grid")
    a, b = np.asarray(grid.a), np.asarray(grid.b)

    def edges(v):
        if v.size == 1:
            return np.array([v[0] - 0.5, v[0] + 0.5])
        mids = (v[:-1] + v[1:]) / 2
        return np.r_[v[0] - (mids[0] - v[0]), mids, v[-1] + (v[-1] - mids[-1])]

    ea, eb = edges(a), edges(b)
    frame.xlim, frame.ylim = (float(eb[0]), float(eb[-1])), (float(ea[0]), float(ea[-1]))
    cells = ['<g class="heatmap" shape-rendering="crispEdges">']
    for i in range(a.size):
        y_top, y_bot = frame.py(ea[i + 1]), frame.py(ea[i])
        for j in range(b.size):
            x_l, x_r = frame.px(eb[j]), frame.px(eb[j + 1])
            cells.append(
                f'<rect class="cell" x="{_f(x_l)}" y="{_f(y_top)}" width="{_f(x_r - x_l)}" '
                f'height="{_f(y_bot - y_top)}" fill="{_ramp(p[i, j])}"/>'
            )
    cells.append("</g>")
    return cells


def _scatter(xs, ys, classes, frame):
    out = ['<g class="scatter">']
    for x, y, c in zip(xs, ys, classes):
        out.append(
            f'<circle class="point y{int(c)}" cx="{_f(frame.px(x))}" cy="{_f(frame.py(y))}" '
            f'r="2" fill="{CLASS_COLORS[int(c)]}" fill-opacity="0.7"/>'
        )
    out.append("</g>")
    return out


def _legend():
    return (
        f'<g class="legend" font-size="11">'
        f'<circle cx="{WIDTH - 90}" cy="18" r="4" fill="{CLASS_COLORS[1]}"/><text x="{WIDTH - 82}" y="22">Y=1</text>'
        f'<circle cx="{WIDTH - 45}" cy="18" r="4" fill="{CLASS_COLORS[0]}"/><text x="{WIDTH - 37}" y="22">Y=0</text></g>'
    )


def render_svg_string(kind, data, title=None):
    if kind not in FIGURES:
        raise RenderError(f"unknown figure kind {kind!r}")
    style, default_title = FIGURES[kind]
    title = title or default_title
    body = []

    if style == "heatmap":
        frame = _Frame((0.0, 1.0), (0.0, 1.0))
        body += _heatmap(data, frame)
        if kind == "fig1d":
            body.append(_cusp_overlay(frame, frame.ylim, frame.xlim[1]))
        body += frame.axes(
            "B (behavior index)", "A (demographic index)",
            xticks=(float(data.b[0]), float(data.b[-1])), yticks=(float(data.a[0]), float(data.a[-1])),
        )
    else:
        cols = {k: np.asarray(v) for k, v in dict(data).items()}
        if cols.get("b") is None or cols["b"].size == 0:
            raise RenderError("no points to plot")
        b, y = cols["b"].astype(float), cols["y"].astype(int)
        other = cols["x"] if style == "latent" else cols["a"]
        other = other.astype(float)
        xlim = (float(min(b.min(), -2.0)), float(max(b.max(), 4.0)))
        if style == "latent":
            pad = max(abs(other.min()), abs(other.max()), 1.0)
            ylim, ylabel = (-pad, pad), "X (latent minimum)"
        else:
            ylim, ylabel = (float(min(other.min(), -1.0)), float(max(other.max(), 1.0))), "A (demographic index)"
        frame = _Frame(xlim, ylim)
        body += _scatter(b, other, y, frame)
        if style == "scatter":
            body.append(_cusp_overlay(frame, ylim, xlim[1]))
            if kind == "fig2b":
                body.append(_switch_lines(frame))
        body += frame.axes("B (behavior index)", ylabel)
        body.append(_legend())

    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">'
        f'<rect class="background" width="{WIDTH}" height="{HEIGHT}" fill="#fff"/>'
        f'<text class="title" x="{WIDTH / 2:g}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>'
    )
    return "\n".join([head, *body, "</svg>"]) + "\n"


def render_svg(kind, data, path, title=None):
    """Write figure ``kind`` to ``path``.

    Heatmap kinds (fig1a, fig1b, fig1d) take a ProbabilityGrid; fig1c and
    fig2b take columns ``a, b, y``; fig2a takes ``b, x, y``.
    """
    text = render_svg_string(kind, data, title)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path
