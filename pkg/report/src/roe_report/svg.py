"""Minimal deterministic SVG assembly.

No library dependency and nothing time- or locale-dependent: identical
inputs give identical bytes. Coordinates are formatted with %.6g.
"""

from __future__ import annotations

from xml.sax.saxutils import escape


def fmt(x: float) -> str:
    return format(float(x), ".6g")


class Svg:
    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.parts: list[str] = []

    def rect(self, x, y, w, h, fill, stroke=None, stroke_width=1.0, opacity=None):
        attrs = (f'x="{fmt(x)}" y="{fmt(y)}" width="{fmt(w)}" '
                 f'height="{fmt(h)}" fill="{fill}"')
        if stroke:
            attrs += f' stroke="{stroke}" stroke-width="{fmt(stroke_width)}"'
        if opacity is not None:
            attrs += f' opacity="{fmt(opacity)}"'
        self.parts.append(f"<rect {attrs}/>")

    def line(self, x1, y1, x2, y2, stroke, width=1.0, dash=None):
        attrs = (f'x1="{fmt(x1)}" y1="{fmt(y1)}" x2="{fmt(x2)}" y2="{fmt(y2)}" '
                 f'stroke="{stroke}" stroke-width="{fmt(width)}"')
        if dash:
            attrs += f' stroke-dasharray="{dash}"'
        self.parts.append(f"<line {attrs}/>")

    def circle(self, cx, cy, r, fill, stroke=None):
        attrs = f'cx="{fmt(cx)}" cy="{fmt(cy)}" r="{fmt(r)}" fill="{fill}"'
        if stroke:
            attrs += f' stroke="{stroke}"'
        self.parts.append(f"<circle {attrs}/>")

    def polyline(self, points, stroke, width=1.5):
        coords = " ".join(f"{fmt(x)},{fmt(y)}" for x, y in points)
        self.parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{stroke}" '
            f'stroke-width="{fmt(width)}"/>')

    def text(self, x, y, content, size=12, anchor="start", fill="#333",
             rotate=None):
        attrs = (f'x="{fmt(x)}" y="{fmt(y)}" font-size="{fmt(size)}" '
                 f'text-anchor="{anchor}" fill="{fill}" '
                 f'font-family="Menlo, Consolas, monospace"')
        if rotate is not None:
            attrs += f' transform="rotate({fmt(rotate)} {fmt(x)} {fmt(y)})"'
        self.parts.append(f"<text {attrs}>{escape(str(content))}</text>")

    def render(self) -> str:
        body = "\n".join(self.parts)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">\n'
            f'<rect x="0" y="0" width="{self.width}" height="{self.height}" '
            f'fill="#ffffff"/>\n{body}\n</svg>\n'
        )


def heat_color(value: float) -> str:
    """Map a residual in [0, 1] to a white -> amber -> crimson ramp."""
    v = min(1.0, max(0.0, value))
    anchors = [
        (0.0, (247, 251, 255)),
        (0.25, (254, 227, 145)),
        (0.5, (254, 153, 41)),
        (0.75, (217, 72, 1)),
        (1.0, (127, 39, 4)),
    ]
    for (t0, c0), (t1, c1) in zip(anchors, anchors[1:]):
        if v <= t1:
            f = 0.0 if t1 == t0 else (v - t0) / (t1 - t0)
            rgb = tuple(round(a + f * (b - a)) for a, b in zip(c0, c1))
            return "#{:02x}{:02x}{:02x}".format(*rgb)
    return "#7f2704"
