"""Minimal static SVG line/point charts; no display dependencies."""

WIDTH, HEIGHT = 640, 420
MARGIN = 56
PALETTE = ("#1f6fb2", "#c84b4b", "#3f9b57", "#8a63b8", "#b28a1f", "#555555")


def _scale(values, lo, hi, out_lo, out_hi):
    span = (hi - lo) or 1.0
    return [out_lo + (v - lo) / span * (out_hi - out_lo) for v in values]


def _axis_ticks(lo, hi, n=5):
    span = (hi - lo) or 1.0
    return [lo + span * i / (n - 1) for i in range(n)]


def line_chart(path, series, title="", x_label="", y_label=""):
    """Write a polyline chart.

    `series` is a list of dicts: {"x": [...], "y": [...], "label": str,
    optional "dashed": bool, optional "points": bool}. NaNs break the line.
    """
    xs = [x for s in series for x, y in zip(s["x"], s["y"]) if y == y]
    ys = [y for s in series for y in s["y"] if y == y]
    if not xs:
        raise ValueError("nothing to plot")
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    pad = 0.05 * ((y_hi - y_lo) or 1.0)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def px(v):
        return MARGIN + (v - x_lo) / ((x_hi - x_lo) or 1.0) * (WIDTH - 2 * MARGIN)

    def py(v):
        return HEIGHT - MARGIN - (v - y_lo) / ((y_hi - y_lo) or 1.0) * (HEIGHT - 2 * MARGIN)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{title}</text>',
    ]
    axis = (f'M {MARGIN} {MARGIN} L {MARGIN} {HEIGHT - MARGIN} '
            f'L {WIDTH - MARGIN} {HEIGHT - MARGIN}')
    parts.append(f'<path d="{axis}" stroke="#222" fill="none"/>')
    for tick in _axis_ticks(x_lo, x_hi):
        parts.append(f'<text x="{px(tick):.1f}" y="{HEIGHT - MARGIN + 18}" '
                     f'text-anchor="middle" font-family="sans-serif" font-size="11">'
                     f'{tick:.4g}</text>')
    for tick in _axis_ticks(y_lo, y_hi):
        parts.append(f'<text x="{MARGIN - 8}" y="{py(tick) + 4:.1f}" '
                     f'text-anchor="end" font-family="sans-serif" font-size="11">'
                     f'{tick:.4g}</text>')
    parts.append(f'<text x="{WIDTH / 2:.0f}" y="{HEIGHT - 12}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="12">{x_label}</text>')
    parts.append(f'<text x="16" y="{HEIGHT / 2:.0f}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="12" '
                 f'transform="rotate(-90 16 {HEIGHT / 2:.0f})">{y_label}</text>')

    for i, s in enumerate(series):
        colour = PALETTE[i % len(PALETTE)]
        dash = ' stroke-dasharray="6 4"' if s.get("dashed") else ""
        segment = []
        chunks = []
        for x, y in zip(s["x"], s["y"]):
            if y != y:
                if segment:
                    chunks.append(segment)
                segment = []
                continue
            segment.append((px(x), py(y)))
        if segment:
            chunks.append(segment)
        for chunk in chunks:
            pts = " ".join(f"{x:.1f},{y:.1f}" for x, y in chunk)
            parts.append(f'<polyline points="{pts}" fill="none" '
                         f'stroke="{colour}" stroke-width="1.6"{dash}/>')
        if s.get("points"):
            for x, y in zip(s["x"], s["y"]):
                if y == y:
                    parts.append(f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" '
                                 f'r="3" fill="{colour}"/>')
        parts.append(f'<text x="{WIDTH - MARGIN + 4}" y="{MARGIN + 16 * i + 10}" '
                     f'font-family="sans-serif" font-size="11" fill="{colour}" '
                     f'text-anchor="end">{s.get("label", "")}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def whisker_chart(path, rows, title="", y_label=""):
    """Point estimates with vertical whiskers.

    `rows` is a list of (label, estimate, lower, upper, group_colour_index).
    """
    if not rows:
        raise ValueError("nothing to plot")
    y_lo = min(min(r[2] for r in rows), 0.0)
    y_hi = max(max(r[3] for r in rows), 0.0)
    pad = 0.08 * ((y_hi - y_lo) or 1.0)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def py(v):
        return HEIGHT - MARGIN - (v - y_lo) / ((y_hi - y_lo) or 1.0) * (HEIGHT - 2 * MARGIN)

    step = (WIDTH - 2 * MARGIN) / (len(rows) + 1)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{title}</text>',
        f'<line x1="{MARGIN}" y1="{py(0):.1f}" x2="{WIDTH - MARGIN}" y2="{py(0):.1f}" '
        f'stroke="#999" stroke-dasharray="4 4"/>',
    ]
    for i, (label, est, lo, hi, group) in enumerate(rows):
        x = MARGIN + step * (i + 1)
        colour = PALETTE[group % len(PALETTE)]
        parts.append(f'<line x1="{x:.1f}" y1="{py(lo):.1f}" x2="{x:.1f}" '
                     f'y2="{py(hi):.1f}" stroke="{colour}" stroke-width="1.6"/>')
        parts.append(f'<circle cx="{x:.1f}" cy="{py(est):.1f}" r="4" fill="{colour}"/>')
        parts.append(f'<text x="{x:.1f}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="10">{label}</text>')
    for tick in _axis_ticks(y_lo, y_hi):
        parts.append(f'<text x="{MARGIN - 8}" y="{py(tick) + 4:.1f}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="11">{tick:.3g}</text>')
    parts.append(f'<text x="16" y="{HEIGHT / 2:.0f}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="12" '
                 f'transform="rotate(-90 16 {HEIGHT / 2:.0f})">{y_label}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
