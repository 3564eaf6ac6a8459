"""
Deterministic SVG and CSV emitters.

The SVG uses style classes only (no inline styles) and a view box computed
from the bounding box of the marked critical points, padded by 20 percent.
Every drawn element carries the identifier of the object it came from, and
the sibling CSV lists the same identifiers.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = ["Layer", "Marker", "PlotDocument", "to_svg", "csv_text", "write_text", "fmt"]

STYLE = """
.short { stroke: #c0392b; stroke-width: 2.5; fill: none; }
.infinite { stroke: #2c3e50; stroke-width: 1.2; fill: none; }
.orthogonal { stroke: #7f8c8d; stroke-width: 0.8; fill: none; stroke-dasharray: 4 3; }
.sigma { stroke: #8e44ad; stroke-width: 1.8; fill: none; }
.support { stroke: #27ae60; stroke-width: 2.5; fill: none; }
.roots { fill: #e67e22; stroke: none; }
.critical { fill: #000000; stroke: none; }
.pole { fill: #ffffff; stroke: #000000; stroke-width: 1; }
.aborted { stroke: #f1c40f; stroke-width: 1; fill: none; }
"""


def fmt(x: float) -> str:
    """Lossless binary64 formatting (17 significant digits)."""
    return "%.17g" % float(x)


@dataclass
class Layer:
    ident: str
    cls: str
    points: np.ndarray


@dataclass
class Marker:
    ident: str
    cls: str
    point: complex


@dataclass
class PlotDocument:
    """A static plot: polylines and point markers over a window in the plane."""

    layers: list = field(default_factory=list)
    markers: list = field(default_factory=list)
    width: int = 800
    height: int = 800
    window: Optional[tuple] = None  # (xmin, xmax, ymin, ymax)

    def add_polyline(self, ident: str, cls: str, points) -> None:
        self.layers.append(Layer(ident, cls, np.asarray(points, dtype=complex)))

    def add_marker(self, ident: str, cls: str, point: complex) -> None:
        self.markers.append(Marker(ident, cls, complex(point)))

    def view(self) -> tuple:
        """View window: the given one, else the padded marker bounding box."""
        if self.window is not None:
            return self.window
        pts = [m.point for m in self.markers]
        if not pts:
            pts = [p for layer in self.layers for p in layer.points]
        if not pts:
            return (-1.0, 1.0, -1.0, 1.0)
        xs = [p.real for p in pts]
        ys = [p.imag for p in pts]
        xmin, xmax, ymin, ymax = min(xs), max(xs), min(ys), max(ys)
        span = max(xmax - xmin, ymax - ymin, 1e-9)
        cx, cy = 0.5 * (xmin + xmax), 0.5 * (ymin + ymax)
        half = 0.5 * span * 1.4  # 20 percent on each side
        return (cx - half, cx + half, cy - half, cy + half)


def _num(x: float) -> str:
    return f"{x:.6f}"


def to_svg(doc: PlotDocument) -> str:
    """Render ``doc``; output depends only on its content and order."""
    xmin, xmax, ymin, ymax = doc.view()
    # SVG y grows downwards, so the imaginary axis is flipped.
    out = io.StringIO()
    out.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    out.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{doc.width}" height="{doc.height}" '
        f'viewBox="{_num(xmin)} {_num(-ymax)} {_num(xmax - xmin)} {_num(ymax - ymin)}">\n'
    )
    out.write(f"<style>{STYLE}</style>\n")
    sw = (xmax - xmin) / doc.width
    out.write("<g>\n")
    for layer in doc.layers:
        if len(layer.points) == 0:
            continue
        pts = " ".join(f"{_num(p.real)},{_num(-p.imag)}" for p in layer.points)
        out.write(
            f'<polyline id="{layer.ident}" class="{layer.cls}" vector-effect="non-scaling-stroke" points="{pts}"/>\n'
        )
    r = 4 * sw
    for m in doc.markers:
        out.write(
            f'<circle id="{m.ident}" class="{m.cls}" cx="{_num(m.point.real)}" cy="{_num(-m.point.imag)}" r="{_num(r)}"/>\n'
        )
    out.write("</g>\n</svg>\n")
    return out.getvalue()


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """Comma-separated text with a header row, LF endings and 17-digit floats."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (float, np.floating)):
                cells.append(fmt(v))
            elif isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_text(path, text: str) -> None:
    """Write with LF line endings regardless of platform."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
