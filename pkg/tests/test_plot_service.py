"""Tests for the SVG plot writer."""
import math
import xml.etree.ElementTree as ET

import pytest

from qrnn.services.plot_service import (
    PlotSeries,
    PlotStyle,
    build_svg_plot,
    decade_ticks,
    emit_svg_plot,
    nice_ticks,
)

SVG = '{http://www.w3.org/2000/svg}'


def parse(svg: str):
    return ET.fromstring(svg.encode('utf-8'))


class TestTicks:
    """Axis tick placement."""

    def test_nice_ticks_unit_interval(self):
        assert nice_ticks(0.0, 1.0) == [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]

    def test_nice_ticks_inside_range(self):
        ticks = nice_ticks(-0.53, 0.47)
        assert all(-0.53 <= t <= 0.47 for t in ticks)
        assert len(ticks) >= 3

    def test_decades(self):
        """1e-4 .. 3e-1 spans exponents -4 to 0."""
        assert decade_ticks(1e-4, 0.3) == [-4, -3, -2, -1, 0]


class TestSvg:
    """Document structure."""

    def _plot(self, **style):
        t = list(range(50))
        series = [
            PlotSeries('x_t', t, [math.cos(0.2 * i) for i in t]),
            PlotSeries('prediction', t, [None] + [math.cos(0.2 * i) for i in t[1:]], dashed=True),
        ]
        return build_svg_plot(series, PlotStyle(title='cos <test> & co', **style))

    def test_well_formed(self):
        """Parses as XML with an svg root."""
        root = parse(self._plot())
        assert root.tag == f'{SVG}svg'
        assert len(root.findall(f'.//{SVG}polyline')) == 2

    def test_title_escaped(self):
        """Markup characters in labels are escaped."""
        root = parse(self._plot())
        assert 'cos <test> & co' in [t.text for t in root.iter(f'{SVG}text')]

    def test_boundary_marker(self):
        """The train/test split is a dashed line carrying its time."""
        root = parse(self._plot(boundary=19.5))
        boundaries = [e for e in root.iter(f'{SVG}line') if e.get('class') == 'boundary']
        assert len(boundaries) == 1
        assert float(boundaries[0].get('data-t')) == 19.5
        assert boundaries[0].get('stroke-dasharray')

    def test_log_axis_labels(self):
        """Log scale labels decades as 1e<k>."""
        series = [PlotSeries('mse', [0, 1, 2], [2e-4, 3e-3, 0.05], kind='scatter')]
        root = parse(build_svg_plot(series, PlotStyle(log_y=True)))
        labels = [t.text for t in root.iter(f'{SVG}text') if t.get('class') == 'tick-y']
        assert labels == ['1e-4', '1e-3', '1e-2', '1e-1']
        assert len(root.findall(f'.//{SVG}circle')) == 3

    def test_log_axis_drops_non_positive(self):
        """Zero cannot be drawn on a log axis."""
        series = [PlotSeries('mse', [0, 1], [0.0, 0.01], kind='scatter')]
        root = parse(build_svg_plot(series, PlotStyle(log_y=True)))
        assert len(root.findall(f'.//{SVG}circle')) == 1

    def test_nothing_to_plot(self):
        with pytest.raises(ValueError):
            build_svg_plot([PlotSeries('empty', [0], [float('nan')])], PlotStyle())

    def test_mismatched_lengths(self):
        with pytest.raises(ValueError):
            PlotSeries('bad', [0, 1], [0.5])

    def test_emit_writes_file(self, tmp_path):
        path = emit_svg_plot([PlotSeries('x', [0, 1], [0, 1])], PlotStyle(), tmp_path / 'plots' / 'x.svg')
        assert parse(path.read_text()).tag == f'{SVG}svg'
