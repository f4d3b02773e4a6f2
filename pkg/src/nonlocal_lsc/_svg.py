"""Static SVG line and scatter plots written by hand (no renderer needed)."""

import math
from xml.sax.saxutils import escape

_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf")


def _fmt(v):
    return f"{v:.4g}"


def line_plot(series, title="", xlabel="", ylabel="", width=640, height=400, scatter=False):
    """``series`` maps a label to ``(xs, ys)``; non-finite points are dropped."""
    pts = {k: [(float(x), float(y)) for x, y in zip(*v)
               if math.isfinite(float(x)) and math.isfinite(float(y))]
           for k, v in series.items()}
    allx = [p[0] for v in pts.values() for p in v] or [0.0, 1.0]
    ally = [p[1] for v in pts.values() for p in v] or [0.0, 1.0]
    x0, x1 = min(allx), max(allx)
    y0, y1 = min(ally), max(ally)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    ml, mr, mt, mb = 70, 20, 40, 50
    pw, ph = width - ml - mr, height - mt - mb

    def sx(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return mt + ph - (y - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           '<rect width="100%" height="100%" fill="white"/>',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
           f'<text x="{width / 2}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
           f'<text x="{ml + pw / 2}" y="{height - 10}" text-anchor="middle" '
           f'font-size="12">{escape(xlabel)}</text>',
           f'<text x="16" y="{mt + ph / 2}" text-anchor="middle" font-size="12" '
           f'transform="rotate(-90 16 {mt + ph / 2})">{escape(ylabel)}</text>']
    for i in range(5):
        xv = x0 + (x1 - x0) * i / 4
        yv = y0 + (y1 - y0) * i / 4
        out.append(f'<text x="{sx(xv):.1f}" y="{mt + ph + 16}" text-anchor="middle" '
                   f'font-size="10">{_fmt(xv)}</text>')
        out.append(f'<text x="{ml - 6}" y="{sy(yv) + 3:.1f}" text-anchor="end" '
                   f'font-size="10">{_fmt(yv)}</text>')
    for i, (label, p) in enumerate(pts.items()):
        colour = _COLOURS[i % len(_COLOURS)]
        if scatter:
            out.extend(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.5" fill="{colour}"/>'
                       for x, y in p)
        elif p:
            path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in p)
            out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" '
                       f'points="{path}"/>')
        out.append(f'<text x="{ml + 10}" y="{mt + 16 + 14 * i}" font-size="11" '
                   f'fill="{colour}">{escape(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
