"""
Static SVG line plots of series and density overlays.

Figures are drawn through matplotlib's object API on the SVG canvas; with a
fixed hash salt and no date metadata the bytes depend only on the data and
the provenance comment.
"""

import logging
from dataclasses import dataclass, field
from io import BytesIO
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from .exceptions import EmptySeries
from .utils import PathLike, atomic_write_bytes

logger = logging.getLogger(__name__)

XML_DECLARATION_END = b"?>\n"


@dataclass
class Curve:
    """One labelled line"""

    label: str
    x: Sequence[float]
    y: Sequence[float]
    linestyle: str = "-"


@dataclass
class StyleSpec:
    title: str = ""
    xlabel: str = "t"
    ylabel: str = ""
    log_y: bool = False
    width: float = 6.4
    height: float = 4.0
    #: horizontal reference lines, (y, label)
    hlines: List[Tuple[float, str]] = field(default_factory=list)


@dataclass
class PlotRequest:
    curves: List[Curve]
    style: StyleSpec = field(default_factory=StyleSpec)


def _clean(curve: Curve, log_y: bool) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(curve.x, dtype=float)
    y = np.asarray(curve.y, dtype=float)
    keep = np.isfinite(x) & np.isfinite(y)
    if log_y:
        keep &= y > 0.0
    return x[keep], y[keep]


def render_svg(request: PlotRequest, provenance: Optional[Dict[str, object]] = None) -> bytes:
    """
    Draw a plot request into SVG bytes

    Args:
        request: Curves and styling
        provenance: Key/value pairs embedded as an XML comment

    Returns:
        SVG document

    Raises:
        EmptySeries if there is no curve or a curve has fewer than two
        plottable points
    """
    if not request.curves:
        raise EmptySeries("plot request has no curves")
    style = request.style
    cleaned = []
    for curve in request.curves:
        x, y = _clean(curve, style.log_y)
        if x.size < 2:
            raise EmptySeries(f"curve {curve.label!r} has {x.size} plottable point(s); need at least 2")
        cleaned.append((curve, x, y))

    fig = Figure(figsize=(style.width, style.height))
    FigureCanvasSVG(fig)
    ax = fig.add_subplot(1, 1, 1)
    for curve, x, y in cleaned:
        ax.plot(x, y, curve.linestyle, label=curve.label, linewidth=1.2)
    for level, label in style.hlines:
        ax.axhline(level, color="0.4", linestyle=":", linewidth=1.0, label=label)
    if style.log_y:
        ax.set_yscale("log")
    ax.set_xlabel(style.xlabel)
    ax.set_ylabel(style.ylabel)
    if style.title:
        ax.set_title(style.title)
    ax.legend(loc="best", fontsize="small")
    fig.tight_layout()

    salt = "".join(f"{k}={provenance[k]};" for k in sorted(provenance)) if provenance else "bornlens"
    buffer = BytesIO()
    with matplotlib.rc_context({"svg.hashsalt": salt, "svg.fonttype": "path"}):
        fig.savefig(buffer, format="svg", metadata={"Date": None, "Creator": "bornlens"})
    svg = buffer.getvalue()
    if provenance:
        comment = "<!-- bornlens " + " ".join(f"{k}={provenance[k]}" for k in sorted(provenance)) + " -->\n"
        head, sep, tail = svg.partition(XML_DECLARATION_END)
        svg = head + sep + comment.encode("utf-8") + tail if sep else comment.encode("utf-8") + svg
    return svg


def emit_plot(
    request: PlotRequest,
    path: PathLike,
    provenance: Optional[Dict[str, object]] = None,
) -> Path:
    """
    Render a plot and write it atomically

    Args:
        request: Curves and styling
        path: Destination .svg file
        provenance: spec hash and seed to embed

    Returns:
        The written path
    """
    target = atomic_write_bytes(path, render_svg(request, provenance))
    logger.debug("Wrote plot %s", target)
    return target


def distance_plot(series: Dict[str, Tuple[Sequence[float], Sequence[float]]], title: str,
                  hlines: Optional[List[Tuple[float, str]]] = None) -> PlotRequest:
    """Log-y plot of several distance series against time"""
    curves = [Curve(kind, t, v) for kind, (t, v) in sorted(series.items())]
    return PlotRequest(curves, StyleSpec(title=title, ylabel="distance", log_y=True, hlines=hlines or []))


def overlay_plot(x: Sequence[float], empirical: Sequence[float], born: Sequence[float], title: str,
                 xlabel: str = "x") -> PlotRequest:
    """Empirical density against the Born density"""
    return PlotRequest(
        [Curve("P", x, empirical), Curve("|psi|^2", x, born, linestyle="--")],
        StyleSpec(title=title, xlabel=xlabel, ylabel="density"),
    )
