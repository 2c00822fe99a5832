"""
Minimal self-contained SVG emitter for the figure experiments.

Each panel is a log-scale scatter of per-index values with an
optional bound curve drawn above it. No external assets, no plotting
library: the output is a single valid XML document. Values of zero
(or below the floor) are clipped to the plot floor, since a log axis
cannot display them.
"""

import math
from dataclasses import dataclass, field

# Log-scale clipping floor for nonpositive or underflowing values.
PLOT_FLOOR = 1e-16

PANEL_W = 300
PANEL_H = 220
MARGIN_L = 48
MARGIN_R = 12
MARGIN_T = 28
MARGIN_B = 30
PANELS_PER_ROW = 3


@dataclass
class Panel:
    title: str
    points: list = field(default_factory=list)  # (index, value)
    bound: list = field(default_factory=list)   # (index, value)
    point_class: str = "pt-rel"


def _clip(v):
    if not math.isfinite(v) or v < PLOT_FLOOR:
        return PLOT_FLOOR
    return v


def _log_range(panels):
    values = []
    for p in panels:
        values.extend(_clip(v) for _, v in p.points)
        values.extend(_clip(v) for _, v in p.bound)
    if not values:
        return -1.0, 1.0
    lo = math.floor(math.log10(min(values)))
    hi = math.ceil(math.log10(max(values)))
    if lo == hi:
        lo -= 1
        hi += 1
    return float(lo), float(hi)


def _x_range(panels):
    hi = 1
    for p in panels:
        for j, _ in p.points:
            hi = max(hi, j)
        for j, _ in p.bound:
            hi = max(hi, j)
    return 0.0, float(hi)


def render(panels, title=""):
    """Render panels into one SVG document (returned as a string)."""
    n_panels = max(len(panels), 1)
    cols = min(PANELS_PER_ROW, n_panels)
    rows = (n_panels + cols - 1) // cols
    width = cols * PANEL_W
    height = rows * PANEL_H + (16 if title else 0)

    ylo, yhi = _log_range(panels)
    xlo, xhi = _x_range(panels)

    plot_w = PANEL_W - MARGIN_L - MARGIN_R
    plot_h = PANEL_H - MARGIN_T - MARGIN_B

    def x_pix(j):
        return MARGIN_L + (j - xlo) / max(xhi - xlo, 1.0) * plot_w

    def y_pix(v):
        lv = math.log10(_clip(v))
        return MARGIN_T + (yhi - lv) / (yhi - ylo) * plot_h

    out = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    )
    out.append(
        "<style>"
        ".pt-rel{fill:#1f4fd6;stroke:none}"
        ".pt-lev{fill:#1f8f3a;stroke:none}"
        ".bound{fill:none;stroke:#d62717;stroke-width:1.2}"
        ".axis{stroke:#222;stroke-width:1;fill:none}"
        ".grid{stroke:#ccc;stroke-width:0.5}"
        "text{font-family:sans-serif;font-size:9px;fill:#222}"
        ".ptitle{font-size:11px}"
        "</style>"
    )
    out.append(f'<rect width="{width}" height="{height}" fill="white"/>')
    if title:
        out.append(f'<text x="6" y="12" class="ptitle">{_escape(title)}</text>')

    y_off0 = 16 if title else 0
    for idx, panel in enumerate(panels):
        gx = (idx % cols) * PANEL_W
        gy = (idx // cols) * PANEL_H + y_off0
        out.append(f'<g transform="translate({gx},{gy})">')
        out.append(
            f'<text x="{MARGIN_L}" y="{MARGIN_T - 10}" class="ptitle">'
            f"{_escape(panel.title)}</text>"
        )
        out.append(
            f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" '
            f'height="{plot_h}" class="axis"/>'
        )
        decade = int(yhi - ylo) // 8 + 1
        level = int(ylo)
        while level <= int(yhi):
            yp = y_pix(10.0**level)
            out.append(
                f'<line x1="{MARGIN_L}" y1="{yp:.2f}" '
                f'x2="{MARGIN_L + plot_w}" y2="{yp:.2f}" class="grid"/>'
            )
            out.append(
                f'<text x="2" y="{yp + 3:.2f}">1e{level}</text>'
            )
            level += decade
        out.append(
            f'<text x="{MARGIN_L + plot_w / 2:.0f}" y="{PANEL_H - 8}">index j</text>'
        )
        for j, v in panel.points:
            out.append(
                f'<circle cx="{x_pix(j):.2f}" cy="{y_pix(v):.2f}" r="1.4" '
                f'class="{panel.point_class}"/>'
            )
        if panel.bound:
            pts = " ".join(
                f"{x_pix(j):.2f},{y_pix(v):.2f}" for j, v in sorted(panel.bound)
            )
            out.append(f'<polyline points="{pts}" class="bound"/>')
        out.append("</g>")

    out.append("</svg>")
    return "\n".join(out)


def _escape(text):
    return (
        str(text)
        .replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )
