"""Self-contained SVG box plots (median, quartiles, 1.5*IQR whiskers)."""

from __future__ import annotations

import math


def box_stats(values: list[float]) -> dict:
    """Median, quartiles, whiskers at 1.5*IQR, and outliers."""
    s = sorted(values)
    n = len(s)
    if n == 0:
        raise ValueError("empty group")

    def quantile(q: float) -> float:
        pos = q * (n - 1)
        lo = int(math.floor(pos))
        hi = min(lo + 1, n - 1)
        frac = pos - lo
        return s[lo] * (1 - frac) + s[hi] * frac

    q1, med, q3 = quantile(0.25), quantile(0.5), quantile(0.75)
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inliers = [v for v in s if lo_fence <= v <= hi_fence]
    return {
        "q1": q1, "median": med, "q3": q3,
        "whisker_low": min(inliers), "whisker_high": max(inliers),
        "outliers": [v for v in s if v < lo_fence or v > hi_fence],
    }


def render_boxplot_svg(groups: list[tuple[str, list[float]]],
                       title: str, y_label: str,
                       width: int = 640, height: int = 420) -> str:
    """An SVG 1.1 document with one box per (label, values) group."""
    margin_l, margin_r, margin_t, margin_b = 70, 20, 40, 50
    plot_w = width - margin_l - margin_r
    plot_h = height - margin_t - margin_b
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{title}</text>',
    ]
    populated = [(label, vals) for label, vals in groups if vals]
    if not populated:
        parts.append(
            f'<text x="{width / 2:.1f}" y="{height / 2:.1f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14" fill="#888">no data</text>')
        parts.append("</svg>")
        return "\n".join(parts)

    all_values = [v for _, vals in populated for v in vals]
    v_lo, v_hi = min(all_values), max(all_values)
    if v_hi == v_lo:
        v_hi = v_lo + 1.0
    pad = 0.08 * (v_hi - v_lo)
    v_lo, v_hi = v_lo - pad, v_hi + pad

    def y_of(v: float) -> float:
        return margin_t + plot_h * (1.0 - (v - v_lo) / (v_hi - v_lo))

    # axis and gridlines
    parts.append(
        f'<line x1="{margin_l}" y1="{margin_t}" x2="{margin_l}" '
        f'y2="{margin_t + plot_h}" stroke="black"/>')
    for k in range(5):
        v = v_lo + (v_hi - v_lo) * k / 4
        y = y_of(v)
        parts.append(
            f'<line x1="{margin_l - 4}" y1="{y:.1f}" x2="{margin_l + plot_w}" '
            f'y2="{y:.1f}" stroke="#ddd"/>')
        parts.append(
            f'<text x="{margin_l - 8}" y="{y + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{v:.3g}</text>')
    parts.append(
        f'<text x="16" y="{margin_t + plot_h / 2:.1f}" font-family="sans-serif" '
        f'font-size="12" transform="rotate(-90 16 {margin_t + plot_h / 2:.1f})" '
        f'text-anchor="middle">{y_label}</text>')

    slot = plot_w / len(groups)
    box_w = min(48.0, slot * 0.5)
    x = margin_l
    for label, vals in groups:
        cx = x + slot / 2
        if vals:
            st = box_stats(vals)
            y_q1, y_q3 = y_of(st["q1"]), y_of(st["q3"])
            y_med = y_of(st["median"])
            y_wl, y_wh = y_of(st["whisker_low"]), y_of(st["whisker_high"])
            parts += [
                f'<line x1="{cx:.1f}" y1="{y_wh:.1f}" x2="{cx:.1f}" y2="{y_q3:.1f}" stroke="black"/>',
                f'<line x1="{cx:.1f}" y1="{y_q1:.1f}" x2="{cx:.1f}" y2="{y_wl:.1f}" stroke="black"/>',
                f'<line x1="{cx - box_w / 4:.1f}" y1="{y_wh:.1f}" x2="{cx + box_w / 4:.1f}" y2="{y_wh:.1f}" stroke="black"/>',
                f'<line x1="{cx - box_w / 4:.1f}" y1="{y_wl:.1f}" x2="{cx + box_w / 4:.1f}" y2="{y_wl:.1f}" stroke="black"/>',
                f'<rect x="{cx - box_w / 2:.1f}" y="{y_q3:.1f}" width="{box_w:.1f}" '
                f'height="{abs(y_q1 - y_q3):.1f}" fill="#9ecae1" stroke="black"/>',
                f'<line x1="{cx - box_w / 2:.1f}" y1="{y_med:.1f}" x2="{cx + box_w / 2:.1f}" '
                f'y2="{y_med:.1f}" stroke="black" stroke-width="2"/>',
            ]
            for v in st["outliers"]:
                parts.append(
                    f'<circle cx="{cx:.1f}" cy="{y_of(v):.1f}" r="2.5" '
                    f'fill="none" stroke="black"/>')
        else:
            parts.append(
                f'<text x="{cx:.1f}" y="{margin_t + plot_h / 2:.1f}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="11" fill="#888">no data</text>')
        parts.append(
            f'<text x="{cx:.1f}" y="{margin_t + plot_h + 18:.1f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{label}</text>')
        x += slot
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
