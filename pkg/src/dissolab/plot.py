"""Minimal SVG line plots for scan output."""
from __future__ import annotations

from xml.sax.saxutils import escape

WIDTH, HEIGHT, PAD = 480, 320, 48


def line_svg(xs, ys, title="", xlabel="", ylabel="", marker_x=None) -> str:
    xs, ys = [float(x) for x in xs], [float(y) for y in ys]
    if not xs or len(xs) != len(ys):
        raise ValueError("need matching, nonempty x and y")
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def sx(x):
        return PAD + (x - x0) / (x1 - x0) * (WIDTH - 2 * PAD)

    def sy(y):
        return HEIGHT - PAD - (y - y0) / (y1 - y0) * (HEIGHT - 2 * PAD)

    pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="{PAD}" y="{PAD}" width="{WIDTH - 2 * PAD}" height="{HEIGHT - 2 * PAD}" fill="none" stroke="#888"/>',
        f'<polyline points="{pts}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>',
    ]
    for x, y in zip(xs, ys):
        out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2" fill="#1f77b4"/>')
    if marker_x is not None:
        mx = sx(float(marker_x))
        out.append(f'<line x1="{mx:.2f}" y1="{PAD}" x2="{mx:.2f}" y2="{HEIGHT - PAD}" stroke="#d62728" stroke-dasharray="4 3"/>')
    out += [
        f'<text x="{WIDTH / 2}" y="{PAD / 2}" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 10}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
        f'<text x="14" y="{HEIGHT / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 14 {HEIGHT / 2})">{escape(ylabel)}</text>',
        f'<text x="{PAD}" y="{HEIGHT - PAD + 14}" font-size="10">{x0:.4g}</text>',
        f'<text x="{WIDTH - PAD}" y="{HEIGHT - PAD + 14}" text-anchor="end" font-size="10">{x1:.4g}</text>',
        f'<text x="{PAD - 4}" y="{HEIGHT - PAD}" text-anchor="end" font-size="10">{y0:.4g}</text>',
        f'<text x="{PAD - 4}" y="{PAD + 10}" text-anchor="end" font-size="10">{y1:.4g}</text>',
        "</svg>",
    ]
    return "\n".join(out) + "\n"


def write_svg(path, *args, **kwargs):
    with open(path, "w") as fh:
        fh.write(line_svg(*args, **kwargs))
