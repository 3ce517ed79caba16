"""
Tests for the SVG plot renderer
"""

import numpy as np
import pytest

from bornlens.exceptions import EmptySeries
from bornlens.plotting import Curve, PlotRequest, StyleSpec, distance_plot, emit_plot, overlay_plot, render_svg

PROVENANCE = {"master_seed": 42, "spec_hash": "abc123"}


def simple_request(**style) -> PlotRequest:
    t = np.linspace(0.0, 1.0, 20)
    return PlotRequest([Curve("L1", t, np.exp(-t))], StyleSpec(title="demo", **style))


class TestRenderSvg:
    """Tests for render_svg"""

    def test_svg_with_provenance(self):
        """The document is SVG and carries the provenance comment"""
        svg = render_svg(simple_request(), PROVENANCE)
        assert svg.startswith(b"<?xml")
        assert b"<svg" in svg
        assert b"<!-- bornlens master_seed=42 spec_hash=abc123 -->" in svg

    def test_deterministic(self):
        """The same request renders to the same bytes"""
        assert render_svg(simple_request(log_y=True), PROVENANCE) == render_svg(simple_request(log_y=True), PROVENANCE)

    def test_no_curves(self):
        """An empty request is rejected"""
        with pytest.raises(EmptySeries):
            render_svg(PlotRequest([]))

    def test_single_point(self):
        """A curve needs two plottable points"""
        with pytest.raises(EmptySeries):
            render_svg(PlotRequest([Curve("x", [0.0], [1.0])]))

    def test_log_axis_drops_non_positive(self):
        """Non-positive values cannot appear on a log axis"""
        request = PlotRequest([Curve("x", [0.0, 1.0, 2.0], [0.0, -1.0, 1.0])], StyleSpec(log_y=True))
        with pytest.raises(EmptySeries):
            render_svg(request)

    def test_reference_lines(self):
        """Horizontal reference lines render without error"""
        svg = render_svg(simple_request(hlines=[(0.5, "floor")]))
        assert b"<svg" in svg


class TestPlotHelpers:
    """Tests for emit_plot and the request builders"""

    def test_emit_plot_writes_file(self, tmp_path):
        """emit_plot writes the rendered bytes atomically"""
        path = emit_plot(simple_request(), tmp_path / "sub" / "plot.svg", PROVENANCE)
        assert path.read_bytes() == render_svg(simple_request(), PROVENANCE)
        assert [p.name for p in path.parent.iterdir()] == ["plot.svg"]

    def test_distance_plot(self):
        """Distance plots use a log axis and sorted curve labels"""
        t = [0.0, 1.0]
        request = distance_plot({"L2": (t, [1.0, 0.1]), "H": (t, [2.0, 0.2])}, title="d")
        assert request.style.log_y
        assert [c.label for c in request.curves] == ["H", "L2"]

    def test_overlay_plot(self):
        """Overlays draw the empirical and Born densities"""
        request = overlay_plot([0.0, 1.0], [0.5, 0.5], [0.4, 0.6], title="snapshot")
        assert [c.label for c in request.curves] == ["P", "|psi|^2"]
        assert request.style.xlabel == "x"


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
