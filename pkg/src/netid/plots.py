"""Self-contained SVG line plots and Graphviz DOT drawings of networks."""

from html import escape

import numpy as np

from .model import PRESENCE_THRESHOLD

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"]


def _ticks(lo, hi, count=5):
    if hi <= lo:
        hi = lo + 1.0
    return np.linspace(lo, hi, count)


def svg_line_plot(series, title="", xlabel="", ylabel="", width=640, height=400):
    """Render ``{label: (x, y)}`` as an SVG document string.

    Output depends only on the data, so identical inputs give identical text.
    """
    ml, mr, mt, mb = 70, 150, 40, 50
    pw, ph = width - ml - mr, height - mt - mb
    xs = np.concatenate([np.asarray(x, float) for x, _ in series.values()]) if series else np.zeros(1)
    ys = np.concatenate([np.asarray(y, float) for _, y in series.values()]) if series else np.zeros(1)
    xs, ys = xs[np.isfinite(xs)], ys[np.isfinite(ys)]
    x0, x1 = (xs.min(), xs.max()) if xs.size else (0.0, 1.0)
    y0, y1 = (ys.min(), ys.max()) if ys.size else (0.0, 1.0)
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y0, y1 = y0 - 0.5, y0 + 0.5

    def px(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def py(y):
        return mt + ph - (y - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{px(t):.2f}" y1="{mt + ph}" x2="{px(t):.2f}" y2="{mt + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px(t):.2f}" y="{mt + ph + 18}" text-anchor="middle">{t:.3g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{ml - 5}" y1="{py(t):.2f}" x2="{ml}" y2="{py(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{ml - 8}" y="{py(t) + 4:.2f}" text-anchor="end">{t:.3g}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="15" y="{mt + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 15 {mt + ph / 2:.1f})">{escape(ylabel)}</text>')
    for k, (label, (x, y)) in enumerate(series.items()):
        color = _COLORS[k % len(_COLORS)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y) if np.isfinite(b))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = mt + 15 + 18 * k
        out.append(f'<line x1="{ml + pw + 10}" y1="{ly}" x2="{ml + pw + 30}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{ml + pw + 35}" y="{ly + 4}">{escape(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _dot_body(A, measured, prefix, threshold):
    n = A.shape[0]
    lines = []
    for i in range(n):
        style = ', style=dashed, color=blue' if i in measured else ''
        lines.append(f'    {prefix}{i} [label="{i + 1}", shape=circle{style}];')
    for i, j in np.argwhere(np.abs(A) > threshold):
        lines.append(f'    {prefix}{j} -> {prefix}{i} [label="{A[i, j]:.3g}"];')
    return lines


def network_dot(networks, measured=(), threshold=PRESENCE_THRESHOLD, name="networks"):
    """DOT source drawing each ``{title: A}`` as its own cluster.

    Edge ``j -> i`` is drawn for every ``|A[i, j]| > threshold``. Measured
    nodes get a dashed outline.
    """
    measured = set(measured or ())
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for k, (title, A) in enumerate(networks.items()):
        lines.append(f"  subgraph cluster_{k} {{")
        lines.append(f'    label="{title}";')
        lines += _dot_body(np.asarray(A, float), measured, f"g{k}_", threshold)
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"
