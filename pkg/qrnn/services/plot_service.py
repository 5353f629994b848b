"""Standalone SVG line and scatter plots."""
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional
from xml.sax.saxutils import escape, quoteattr

logger = logging.getLogger(__name__)

PALETTE = ('#1f77b4', '#d62728', '#2ca02c', '#ff7f0e', '#9467bd', '#8c564b')
MARGIN = {'left': 70, 'right': 20, 'top': 40, 'bottom': 50}


@dataclass
class PlotSeries:
    """One labelled line or scatter; None or non-finite points are skipped."""

    label: str
    x: list
    y: list
    kind: str = 'line'
    color: Optional[str] = None
    dashed: bool = False

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise ValueError(f'Series {self.label!r}: {len(self.x)} x values vs {len(self.y)} y values')
        if self.kind not in ('line', 'scatter'):
            raise ValueError(f'Unknown series kind {self.kind!r}')

    def points(self, log_y: bool = False) -> list:
        points = []
        for x, y in zip(self.x, self.y):
            if x is None or y is None or not (math.isfinite(x) and math.isfinite(y)):
                continue
            if log_y and y <= 0:
                continue
            points.append((float(x), float(y)))
        return points


@dataclass
class PlotStyle:
    title: str = ''
    x_label: str = 't'
    y_label: str = ''
    width: int = 720
    height: int = 400
    log_y: bool = False
    boundary: Optional[float] = None


class SvgCanvas:
    """Accumulates SVG elements as text."""

    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.svg = (
            '<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n'
            f'<svg version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}" '
            'xmlns="http://www.w3.org/2000/svg">\n'
        )

    def group_start(self, css_class: str):
        self.svg += f'<g class="{css_class}">\n'

    def group_end(self):
        self.svg += '</g>\n'

    def rect(self, x, y, width, height, fill='white', extra=''):
        self.svg += f'<rect x="{x:.1f}" y="{y:.1f}" width="{width:.1f}" height="{height:.1f}" fill="{fill}" {extra}/>\n'

    def line(self, x1, y1, x2, y2, stroke='black', extra=''):
        self.svg += (
            f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" stroke="{stroke}" {extra}/>\n'
        )

    def polyline(self, points, stroke, extra=''):
        coordinates = ' '.join(f'{x:.2f},{y:.2f}' for x, y in points)
        self.svg += f'<polyline points="{coordinates}" fill="none" stroke="{stroke}" stroke-width="1.5" {extra}/>\n'

    def circle(self, x, y, radius, fill):
        self.svg += f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{radius}" fill="{fill}"/>\n'

    def text(self, x, y, string, extra=''):
        self.svg += f'<text x="{x:.2f}" y="{y:.2f}" {extra}>{escape(str(string))}</text>\n'

    def get_svg(self) -> str:
        return f'{self.svg}</svg>\n'


def nice_ticks(low: float, high: float, count: int = 5) -> list:
    """Round tick values spanning [low, high] with steps of 1, 2 or 5 x 10^k."""
    if high <= low:
        return [low]
    raw = (high - low) / count
    magnitude = 10 ** math.floor(math.log10(raw))
    step = next(m * magnitude for m in (1, 2, 5, 10) if m * magnitude >= raw)
    first = math.ceil(low / step - 1e-9)
    last = math.floor(high / step + 1e-9)
    return [round(k * step, 12) for k in range(first, last + 1)]


def decade_ticks(low: float, high: float) -> list:
    """Exponents k with 10^k spanning [low, high]."""
    return list(range(math.floor(math.log10(low)), math.ceil(math.log10(high)) + 1))


def _format_tick(value: float) -> str:
    return f'{value:g}'


def build_svg_plot(series: list, style: PlotStyle) -> str:
    """Render series to an SVG document string."""
    if not series:
        raise ValueError('Nothing to plot')

    all_points = [p for s in series for p in s.points(style.log_y)]
    if not all_points:
        raise ValueError('No finite points to plot')

    xs = [p[0] for p in all_points]
    ys = [p[1] for p in all_points]
    x_low, x_high = min(xs), max(xs)
    if style.boundary is not None:
        x_low, x_high = min(x_low, style.boundary), max(x_high, style.boundary)
    if x_high == x_low:
        x_low, x_high = x_low - 0.5, x_high + 0.5

    if style.log_y:
        exponents = decade_ticks(min(ys), max(ys))
        y_low, y_high = float(exponents[0]), float(exponents[-1])
        if y_high == y_low:
            y_high += 1
            exponents.append(exponents[-1] + 1)
        y_ticks = [(float(k), f'1e{k}') for k in exponents]
    else:
        y_low, y_high = min(ys), max(ys)
        pad = 0.05 * (y_high - y_low) if y_high > y_low else 0.5
        y_low, y_high = y_low - pad, y_high + pad
        y_ticks = [(v, _format_tick(v)) for v in nice_ticks(y_low, y_high)]

    left, top = MARGIN['left'], MARGIN['top']
    plot_width = style.width - MARGIN['left'] - MARGIN['right']
    plot_height = style.height - MARGIN['top'] - MARGIN['bottom']

    def to_x(x):
        return left + (x - x_low) / (x_high - x_low) * plot_width

    def to_y(y):
        if style.log_y:
            y = math.log10(y)
        return top + (y_high - y) / (y_high - y_low) * plot_height

    def tick_y(value):
        return top + (y_high - value) / (y_high - y_low) * plot_height

    canvas = SvgCanvas(style.width, style.height)
    canvas.rect(0, 0, style.width, style.height)

    canvas.group_start('axes')
    canvas.line(left, top + plot_height, left + plot_width, top + plot_height)
    canvas.line(left, top, left, top + plot_height)
    for value in nice_ticks(x_low, x_high):
        x = to_x(value)
        canvas.line(x, top + plot_height, x, top + plot_height + 5)
        canvas.text(x, top + plot_height + 18, _format_tick(value), 'class="tick-x" text-anchor="middle" font-size="11"')
    for value, label in y_ticks:
        y = tick_y(value)
        canvas.line(left - 5, y, left, y)
        canvas.text(left - 8, y + 4, label, 'class="tick-y" text-anchor="end" font-size="11"')
    canvas.text(left + plot_width / 2, style.height - 10, style.x_label, 'text-anchor="middle" font-size="12"')
    canvas.text(16, top + plot_height / 2, style.y_label,
                f'text-anchor="middle" font-size="12" transform="rotate(-90 16 {top + plot_height / 2:.2f})"')
    if style.title:
        canvas.text(style.width / 2, 24, style.title, 'text-anchor="middle" font-size="14"')
    canvas.group_end()

    if style.boundary is not None:
        x = to_x(style.boundary)
        canvas.line(x, top, x, top + plot_height, stroke='grey',
                    extra=f'class="boundary" data-t={quoteattr(repr(float(style.boundary)))} stroke-dasharray="6,4"')

    canvas.group_start('series')
    for index, s in enumerate(series):
        color = s.color or PALETTE[index % len(PALETTE)]
        points = [(to_x(x), to_y(y)) for x, y in s.points(style.log_y)]
        if s.kind == 'line':
            canvas.polyline(points, color, 'stroke-dasharray="5,3"' if s.dashed else '')
        else:
            for x, y in points:
                canvas.circle(x, y, 3, color)
    canvas.group_end()

    canvas.group_start('legend')
    for index, s in enumerate(series):
        color = s.color or PALETTE[index % len(PALETTE)]
        y = top + 12 + 16 * index
        x = left + plot_width - 150
        canvas.line(x, y, x + 20, y, stroke=color, extra='stroke-width="2"')
        canvas.text(x + 26, y + 4, s.label, 'font-size="11"')
    canvas.group_end()

    return canvas.get_svg()


def emit_svg_plot(series: list, style: PlotStyle, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(build_svg_plot(series, style), encoding='utf-8')
    logger.info(f'Wrote plot {path}')
    return path
