"""Minimal self-contained SVG writers for run curves and selection maps.

No plotting dependency: files are assembled as plain SVG text so they render
anywhere. Only two figures are needed, a three-panel training-curve chart
and a color-map of hard-attention selections.
"""

from __future__ import annotations

_GREEN = "#3a915f"
_RED = "#c43a3a"
_FG = "#222222"
_GRID = "#bbbbbb"


def _fmt(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".") if x == x else "nan"


def _panel(x0: float, y0: float, w: float, h: float, xs, ys, title: str, color: str) -> str:
    lo = min(ys) if ys else 0.0
    hi = max(ys) if ys else 1.0
    if hi - lo < 1e-12:
        hi = lo + 1.0
    x_max = max(xs) if xs else 1
    pts = []
    for x, y in zip(xs, ys):
        px = x0 + (x / x_max) * w if x_max else x0
        py = y0 + h - ((y - lo) / (hi - lo)) * h
        pts.append(f"{px:.1f},{py:.1f}")
    frag = [
        f'<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="{_GRID}"/>',
        f'<text x="{x0 + w / 2}" y="{y0 - 8}" text-anchor="middle" '
        f'font-size="13" fill="{_FG}">{title}</text>',
        f'<text x="{x0 - 4}" y="{y0 + 10}" text-anchor="end" font-size="10" '
        f'fill="{_FG}">{_fmt(hi)}</text>',
        f'<text x="{x0 - 4}" y="{y0 + h}" text-anchor="end" font-size="10" '
        f'fill="{_FG}">{_fmt(lo)}</text>',
        f'<text x="{x0}" y="{y0 + h + 14}" font-size="10" fill="{_FG}">0</text>',
        f'<text x="{x0 + w}" y="{y0 + h + 14}" text-anchor="end" font-size="10" '
        f'fill="{_FG}">{x_max}</text>',
        f'<polyline fill="none" stroke="{color}" stroke-width="1.6" '
        f'points="{" ".join(pts)}"/>',
    ]
    return "\n".join(frag)


def training_curves_svg(path, steps, test_accuracy, train_accuracy, loss) -> None:
    """Three side-by-side panels: test accuracy, train accuracy, loss."""
    panel_w, panel_h, pad, gap = 260, 180, 48, 40
    width = 3 * panel_w + 2 * gap + 2 * pad
    height = panel_h + 2 * pad
    steps = list(steps)
    body = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    panels = [
        ("test accuracy", list(test_accuracy), "#2a6fb0"),
        ("train accuracy", list(train_accuracy), "#b07a2a"),
        ("loss", list(loss), "#7a2ab0"),
    ]
    for i, (title, ys, color) in enumerate(panels):
        x0 = pad + i * (panel_w + gap)
        body.append(_panel(x0, pad, panel_w, panel_h, steps, ys, title, color))
        body.append(
            f'<text x="{x0 + panel_w / 2}" y="{height - 8}" text-anchor="middle" '
            f'font-size="11" fill="{_FG}">step</text>'
        )
    body.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(body))


def qhas_svg(path, rows) -> None:
    """Color map of selection scores, one row per (label, report) pair.

    Green cells are unselected flips, red cells selected; each cell prints
    its angle.
    """
    rows = list(rows)
    n_cells = max(len(report.entries) for _, report in rows)
    cell_w, cell_h, label_w, pad = 92, 42, 72, 16
    width = label_w + n_cells * cell_w + 2 * pad
    height = len(rows) * cell_h + 2 * pad + 18
    body = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for i in range(n_cells):
        cx = pad + label_w + i * cell_w + cell_w / 2
        body.append(
            f'<text x="{cx}" y="{pad + 8}" text-anchor="middle" font-size="10" '
            f'fill="{_FG}">{i}</text>'
        )
    for r, (label, report) in enumerate(rows):
        y = pad + 14 + r * cell_h
        body.append(
            f'<text x="{pad + label_w - 8}" y="{y + cell_h / 2 + 4}" text-anchor="end" '
            f'font-size="12" fill="{_FG}">{label}</text>'
        )
        for e in report.entries:
            x = pad + label_w + e.dp_index * cell_w
            fill = _RED if e.hard_score else _GREEN
            body.append(
                f'<rect x="{x + 1}" y="{y}" width="{cell_w - 2}" height="{cell_h - 2}" '
                f'fill="{fill}"/>'
            )
            body.append(
                f'<text x="{x + cell_w / 2}" y="{y + cell_h / 2 + 4}" text-anchor="middle" '
                f'font-size="10" fill="white">{e.theta:.5f}</text>'
            )
    body.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(body))
