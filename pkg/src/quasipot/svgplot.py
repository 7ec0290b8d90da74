"""Self-contained SVG line charts, byte-deterministic for fixed input.

Static SVG keeps the artifact diffable and avoids a rendering dependency.
All floats are written with repr-faithful precision so identical inputs
produce identical files.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_W, _H = 720.0, 420.0
_ML, _MR, _MT, _MB = 56.0, 16.0, 28.0, 40.0


def _fmt(v):
    return f"{float(v):.17g}"


def _fmt_coord(v):
    """Plot coordinates: fixed decimals so ticks align, still deterministic."""
    return f"{float(v):.3f}"


def render_chart(curves, shaded=(), title=""):
    """SVG text for labelled curves over one shared grid.

    curves: sequence of (label, x, y) with identical x arrays. shaded:
    intervals (lo, hi) in x units drawn as bands behind the curves; a band
    with lo > hi wraps around the right edge and is split in two.
    """
    if not curves:
        raise ValidationError("nothing to plot: curve list is empty")
    named = []
    for label, x, y in curves:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
            raise ValidationError(f"curve {label!r}: malformed grid data")
        named.append((str(label), x, y))
    x0 = named[0][1]
    for label, x, _ in named[1:]:
        if len(x) != len(x0) or not np.array_equal(x, x0):
            raise ValidationError(f"curve {label!r}: grid differs from first curve")

    xmin, xmax = float(x0[0]), float(x0[-1])
    ymin = min(float(np.min(y)) for _, _, y in named)
    ymax = max(float(np.max(y)) for _, _, y in named)
    if ymax - ymin < 1e-300:
        ymin, ymax = ymin - 1.0, ymax + 1.0
    pad = 0.05 * (ymax - ymin)
    ymin, ymax = ymin - pad, ymax + pad

    def px(v):
        return _ML + (v - xmin) / (xmax - xmin) * (_W - _ML - _MR)

    def py(v):
        return _H - _MB - (v - ymin) / (ymax - ymin) * (_H - _MT - _MB)

    out = []
    out.append('<?xml version="1.0" encoding="UTF-8"?>')
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt_coord(_W)}" '
               f'height="{_fmt_coord(_H)}" viewBox="0 0 {_fmt_coord(_W)} {_fmt_coord(_H)}">')
    out.append(f'<rect width="{_fmt_coord(_W)}" height="{_fmt_coord(_H)}" fill="#ffffff"/>')
    for lo, hi in shaded:
        parts = [(lo, hi)] if lo <= hi else [(lo, xmax), (xmin, hi)]
        for a, b in parts:
            a, b = max(float(a), xmin), min(float(b), xmax)
            if b <= a:
                continue
            out.append(f'<rect x="{_fmt_coord(px(a))}" y="{_fmt_coord(_MT)}" '
                       f'width="{_fmt_coord(px(b) - px(a))}" '
                       f'height="{_fmt_coord(_H - _MT - _MB)}" '
                       'fill="#f0e0a0" fill-opacity="0.45"/>')
    out.append(f'<rect x="{_fmt_coord(_ML)}" y="{_fmt_coord(_MT)}" '
               f'width="{_fmt_coord(_W - _ML - _MR)}" '
               f'height="{_fmt_coord(_H - _MT - _MB)}" '
               'fill="none" stroke="#404040" stroke-width="1"/>')

    for k, (vx, anchor) in enumerate(((xmin, "start"), (xmax, "end"))):
        out.append(f'<text x="{_fmt_coord(px(vx))}" y="{_fmt_coord(_H - _MB + 16.0)}" '
                   f'font-family="monospace" font-size="11" text-anchor="{anchor}" '
                   f'fill="#202020">{_fmt(vx)}</text>')
    for vy in (ymin, ymax):
        out.append(f'<text x="{_fmt_coord(_ML - 4.0)}" y="{_fmt_coord(py(vy) + 4.0)}" '
                   f'font-family="monospace" font-size="11" text-anchor="end" '
                   f'fill="#202020">{float(vy):.6g}</text>')
    if title:
        out.append(f'<text x="{_fmt_coord(_ML)}" y="{_fmt_coord(_MT - 8.0)}" '
                   f'font-family="monospace" font-size="13" '
                   f'fill="#202020">{_escape(title)}</text>')

    for k, (label, x, y) in enumerate(named):
        color = _PALETTE[k % len(_PALETTE)]
        pts = " ".join(f"{_fmt_coord(px(a))},{_fmt_coord(py(b))}"
                       for a, b in zip(x, y))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   'stroke-width="1.5"/>')
        ly = _MT + 16.0 + 16.0 * k
        out.append(f'<line x1="{_fmt_coord(_ML + 8.0)}" y1="{_fmt_coord(ly - 4.0)}" '
                   f'x2="{_fmt_coord(_ML + 28.0)}" y2="{_fmt_coord(ly - 4.0)}" '
                   f'stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<text x="{_fmt_coord(_ML + 34.0)}" y="{_fmt_coord(ly)}" '
                   f'font-family="monospace" font-size="12" '
                   f'fill="#202020">{_escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(text):
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))


def emit_plot(curves, path, shaded=(), title=""):
    """Render and write; returns the path."""
    text = render_chart(curves, shaded=shaded, title=title)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path
