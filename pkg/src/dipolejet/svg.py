"""Minimal SVG heat map writer (no plotting dependency)."""

import numpy as np

# a few anchor colours of a dark-to-bright ramp
_RAMP = np.array([
    [68, 1, 84],
    [59, 82, 139],
    [33, 145, 140],
    [94, 201, 98],
    [253, 231, 37],
], dtype=float)


def _colour(v):
    v = min(max(v, 0.0), 1.0) * (len(_RAMP) - 1)
    i = min(int(v), len(_RAMP) - 2)
    c = _RAMP[i] + (v - i) * (_RAMP[i + 1] - _RAMP[i])
    return "#%02x%02x%02x" % tuple(int(round(x)) for x in c)


def heatmap_svg(points, values, cell, title="", size=480, log=True):
    """Square cells of side ``cell`` centred at ``points``, coloured by
    ``values`` (log10 scale by default).  Non-finite values are grey."""
    pts = np.asarray(points, dtype=float)
    vals = np.asarray(values, dtype=float)
    ok = np.isfinite(vals)
    shown = np.log10(np.maximum(vals, 1e-300)) if log else vals.copy()
    lo, hi = (float(shown[ok].min()), float(shown[ok].max())) if ok.any() else (0.0, 1.0)
    span = hi - lo if hi > lo else 1.0
    x0, y0 = pts.min(axis=0) - cell / 2
    x1, y1 = pts.max(axis=0) + cell / 2
    scale = size / max(x1 - x0, y1 - y0)
    top = 30
    w = int(round((x1 - x0) * scale))
    h = int(round((y1 - y0) * scale))
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w + 20}" height="{h + top + 30}">',
        f'<text x="10" y="20" font-family="sans-serif" font-size="13">{title}</text>',
    ]
    c = cell * scale
    for (px, py), v, s, good in zip(pts, vals, shown, ok):
        fill = _colour((s - lo) / span) if good else "#999999"
        sx = 10 + (px - cell / 2 - x0) * scale
        sy = top + (y1 - py - cell / 2) * scale  # y axis up
        out.append(f'<rect x="{sx:.2f}" y="{sy:.2f}" width="{c:.2f}" height="{c:.2f}" fill="{fill}"/>')
    label = "log10 " if log else ""
    out.append(f'<text x="10" y="{h + top + 20}" font-family="sans-serif" font-size="11">{label}range [{lo:.3g}, {hi:.3g}]</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
