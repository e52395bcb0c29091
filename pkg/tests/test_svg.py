import re

import numpy as np
import pytest

from ebgan.numerics import ParameterError
from ebgan.svg import PlotStyle, ScatterData, SeriesData, emit_svg, line_plot, render, scatter_plot


def test_one_polyline_per_series():
    svg = line_plot([0, 1], {"a": [0.2, 0.4], "b": [0.5, 0.5]})
    assert svg.count("<polyline") == 2
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")


def test_scatter_classes():
    svg = scatter_plot(np.array([[0, 0], [1, 1], [2, 0], [0, 2.0]]), ["real", "fake", "real", "fake"])
    circles = re.findall(r'<circle class="(c\d)"', svg)
    assert len(circles) == 4 and len(set(circles)) == 2


def test_deterministic_bytes(tmp_path):
    data = SeriesData(np.arange(5), {"x": np.linspace(0, 1, 5)})
    emit_svg(data, PlotStyle(title="t<1>"), tmp_path / "a.svg")
    emit_svg(data, PlotStyle(title="t<1>"), tmp_path / "b.svg")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()
    assert "t&lt;1&gt;" in (tmp_path / "a.svg").read_text()


def test_constant_series_and_nan():
    svg = render(SeriesData([0, 1, 2], {"flat": [0.5, np.nan, 0.5]}))
    assert svg.count("<polyline") == 1


def test_errors(tmp_path):
    with pytest.raises(ParameterError):
        line_plot([], {"a": []})
    with pytest.raises(ParameterError):
        line_plot([0, 1], {"a": [1]})
    with pytest.raises(ParameterError):
        scatter_plot(np.zeros((0, 2)), [])
    with pytest.raises(OSError):
        emit_svg(ScatterData(np.zeros((1, 2)), ["a"]), PlotStyle(), tmp_path / "missing" / "x.svg")
