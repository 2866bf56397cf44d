"""SVG figure generation tests."""

import pytest

from psitomo import bloch_grid
from psitomo.figures import _ramp_color, bloch_figure, histogram_figure


def test_ramp_color_endpoints():
    assert _ramp_color(0.0) == "#440154"
    assert _ramp_color(1.0) == "#fde725"
    mid = _ramp_color(0.5)
    assert mid.startswith("#") and len(mid) == 7


def test_bloch_figure_marker_count_and_annotation():
    states = bloch_grid(25)
    fids = [0.99 + 0.0004 * i for i in range(25)]
    svg = bloch_figure(states, fids, 0.995, 0.003)
    assert svg.count('class="pt"') == 25
    assert "mean F = 0.9950" in svg
    assert svg.startswith("<svg")
    assert svg.rstrip().endswith("</svg>")


def test_bloch_figure_requires_matching_lengths():
    with pytest.raises(ValueError):
        bloch_figure(bloch_grid(4), [1.0], 1.0, 0.0)


def test_histogram_figure_bar_count():
    fids = [0.99 + 0.0005 * (i % 20) for i in range(100)]
    svg = histogram_figure(fids, bins=20)
    assert svg.count('class="bar"') == 20
    assert svg.startswith("<svg")


def test_histogram_is_text_stable():
    fids = [0.991, 0.993, 0.997, 1.0]
    assert histogram_figure(fids) == histogram_figure(fids)
