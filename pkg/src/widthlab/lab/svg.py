"""Minimal SVG writers for heatmaps and line plots.

The markup is assembled as text with fixed number formatting, so the same
data always gives the same bytes.
"""

import math
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _f(v):
    return f"{v:.2f}"


def _header(width, height):
    return [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
            f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>']


def _text(x, y, s, anchor="middle", size=11, rotate=None):
    tr = f' transform="rotate({rotate} {_f(x)} {_f(y)})"' if rotate is not None else ""
    return (f'<text x="{_f(x)}" y="{_f(y)}" text-anchor="{anchor}" font-size="{size}"{tr}>'
            f"{escape(str(s))}</text>")


def _gray(v):
    """White (0) to dark blue (1)."""
    v = min(max(v, 0.0), 1.0)
    r = round(255 - v * (255 - 8))
    g = round(255 - v * (255 - 48))
    b = round(255 - v * (255 - 107))
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap(values, xlabels, ylabels, title="", xname="", yname=""):
    """``values[i][j]`` in [0, 1] (or None) drawn at row ylabels[i], column xlabels[j]."""
    cw, ch, left, top = 40, 28, 70, 40
    width = left + cw * len(xlabels) + 20
    height = top + ch * len(ylabels) + 50
    out = _header(width, height)
    out.append(_text(width / 2, 20, title, size=13))
    for i, row in enumerate(values):
        y = top + ch * (len(ylabels) - 1 - i)
        out.append(_text(left - 8, y + ch / 2 + 4, ylabels[i], anchor="end"))
        for j, v in enumerate(row):
            x = left + cw * j
            fill = "#dddddd" if v is None else _gray(v)
            out.append(f'<rect x="{x}" y="{y}" width="{cw}" height="{ch}" fill="{fill}" '
                       f'stroke="white"/>')
            if v is not None:
                color = "white" if v > 0.55 else "black"
                out.append(f'<text x="{_f(x + cw / 2)}" y="{_f(y + ch / 2 + 4)}" '
                           f'text-anchor="middle" font-size="9" fill="{color}">{v:.2f}</text>')
    base = top + ch * len(ylabels)
    for j, lab in enumerate(xlabels):
        out.append(_text(left + cw * j + cw / 2, base + 14, lab))
    out.append(_text(left + cw * len(xlabels) / 2, base + 34, xname))
    out.append(_text(16, top + ch * len(ylabels) / 2, yname, rotate=-90))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _ticks(lo, hi, log):
    if log:
        a, b = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
        return [10.0**k for k in range(a, b + 1)]
    step = (hi - lo) / 4 if hi > lo else 1.0
    return [lo + k * step for k in range(5)]


def line_plot(series, title="", xname="", yname="", logx=False, logy=False):
    """``series`` is an ordered list of (label, xs, ys); non-positive values are skipped on log axes."""
    width, height, left, right, top, bottom = 520, 360, 70, 150, 36, 50
    pts = [(x, y) for _, xs, ys in series for x, y in zip(xs, ys)
           if y is not None and (not logx or x > 0) and (not logy or y > 0)]
    out = _header(width, height)
    out.append(_text((left + width - right) / 2, 20, title, size=13))
    if not pts:
        out.append(_text(width / 2, height / 2, "no data"))
        out.append("</svg>")
        return "\n".join(out) + "\n"
    tx = (lambda v: math.log10(v)) if logx else (lambda v: v)
    ty = (lambda v: math.log10(v)) if logy else (lambda v: v)
    xs_all = [p[0] for p in pts]
    ys_all = [p[1] for p in pts]
    xlo, xhi = tx(min(xs_all)), tx(max(xs_all))
    ylo, yhi = ty(min(ys_all)), ty(max(ys_all))
    if xhi == xlo:
        xlo, xhi = xlo - 1, xhi + 1
    if yhi == ylo:
        ylo, yhi = ylo - 1, yhi + 1
    pw, ph = width - left - right, height - top - bottom

    def px(v):
        return left + (tx(v) - xlo) / (xhi - xlo) * pw

    def py(v):
        return top + ph - (ty(v) - ylo) / (yhi - ylo) * ph

    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for t in _ticks(min(ys_all), max(ys_all), logy):
        if ylo - 1e-12 <= ty(t) <= yhi + 1e-12:
            out.append(_text(left - 6, py(t) + 4, f"{t:.3g}", anchor="end"))
    for x in sorted(set(xs_all)):
        out.append(_text(px(x), top + ph + 14, f"{x:g}"))
    out.append(_text(left + pw / 2, height - 12, xname))
    out.append(_text(16, top + ph / 2, yname, rotate=-90))
    for k, (label, xs, ys) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        seg = [(px(x), py(y)) for x, y in zip(xs, ys)
               if y is not None and (not logx or x > 0) and (not logy or y > 0)]
        if seg:
            path = " ".join(f"{_f(a)},{_f(b)}" for a, b in seg)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
            for a, b in seg:
                out.append(f'<circle cx="{_f(a)}" cy="{_f(b)}" r="2.5" fill="{color}"/>')
        ly = top + 14 + 16 * k
        out.append(f'<line x1="{width - right + 10}" y1="{ly - 4}" x2="{width - right + 28}" '
                   f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(_text(width - right + 32, ly, label, anchor="start", size=10))
    out.append("</svg>")
    return "\n".join(out) + "\n"
