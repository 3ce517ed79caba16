"""
Gravity study: a delta start at altitude h above a mirror relaxes in three
phases; compare the first phase boundary with the appearance of interference
peaks in |psi|^2.
"""

import logging
import math
from typing import Any, Dict, List

from ..base_study import BaseStudy, StudyReport
from ..config import GravitySpec
from ..exceptions import BornLensException
from ..models import GravityModel, gravity_coeffs, neutron_units
from ..plotting import Curve, PlotRequest, StyleSpec, distance_plot, overlay_plot
from ..registry import register_study
from ..sde import Ensemble, derive_seed
from ..stats import (
    SampledCurve,
    detect_peaks_prominence,
    detect_phase_boundaries,
    floor_crossing_time,
    interference_time_prominence,
    log_scatter,
)
from ..utils import param_dir
from .common import equilibrium_control, run_distances, series_entries

logger = logging.getLogger(__name__)

BOUNDARY = "reflect-at-zero"
#: phase extrema must rise this many control-run log scatters above the noise
NOISE_SIGMAS = 3.0


def interference_times(
    model: GravityModel,
    dt: float,
    t_end: float,
    prominences: List[float],
    tolerance: float = 0.05,
) -> Dict[float, Any]:
    """
    tau_int(p): first time |psi|^2 shows two new peaks of prominence > p in
    the band (0, 0.6) of its normalized height; error text where none appear

    Peaks of the truncated initial density are followed through the scan and
    do not count.
    """
    if model.raw_deficit > 1e-4:
        logger.warning(
            "%s keeps %.3f of the initial norm; truncation ripples at t = 0 are excluded from tau_int",
            model.name, model.raw_norm,
        )
    start = SampledCurve(*model.tabulated_density(0.0))
    steps = int(math.floor(t_end / dt + 1e-9))
    curves = [(k * dt, SampledCurve(*model.tabulated_density(k * dt))) for k in range(1, steps + 1)]
    found: Dict[float, Any] = {}
    for p in sorted(prominences):
        baseline = detect_peaks_prominence(start, p)
        try:
            found[p] = interference_time_prominence(curves, p, baseline=baseline, tolerance=tolerance)
        except BornLensException as e:
            found[p] = f"{type(e).__name__}: {e}"
    return found


@register_study("gravity")
class GravityStudy(BaseStudy):
    """Per altitude: L_H phases tau1/tau2, floor-crossing tau_q and tau_int(p)/tau1"""

    spec_class = GravitySpec

    def run(self, spec: GravitySpec) -> StudyReport:
        report = self.new_report(spec)
        units = neutron_units()
        report.summary["units"] = units
        for h in sorted(spec.h):
            report.points.append(self._run_point(spec, h, units, report))
        ratios = [p.get("ratio") for p in report.points]
        report.summary["ratios_near_unity"] = all(r is not None and 0.8 <= r <= 1.25 for r in ratios)
        return report

    def _run_point(self, spec: GravitySpec, h: float, units: Dict[str, float], report: StudyReport) -> Dict[str, Any]:
        stem = param_dir("h", h)
        record: Dict[str, Any] = {"h": h, "h_um": h * units["x0_um"], "errors": {}}
        logger.info("gravity: h=%g", h)
        try:
            model = gravity_coeffs(h, spec.zeta, n_max=spec.n_max, min_norm=spec.min_norm)
        except BornLensException as e:
            record["errors"]["expansion"] = self._handle_error(e, stem)
            return record
        record["n_max"] = model.n_max
        record["raw_norm"] = model.raw_norm
        record["raw_deficit"] = model.raw_deficit
        record["eigenaltitudes"] = model.eigenaltitudes().tolist()
        record["eigenaltitudes_um"] = (model.eigenaltitudes() * units["x0_um"]).tolist()

        record["tau_int"] = interference_times(
            model, spec.interference_dt, spec.t_end, sorted(set(spec.p) | set(spec.band_p) | {spec.reference_p}),
            tolerance=spec.ripple_tolerance,
        )

        ensemble = Ensemble.delta(spec.n, h, master_seed=derive_seed(spec.master_seed, stem))
        try:
            series, observer, result = run_distances(
                model, ensemble, spec, self.config, spec.t_end,
                snapshot_times=spec.snapshot_times,
                record_ids=[0] if spec.dump_trajectory else None,
                boundary=BOUNDARY,
            )
        except BornLensException as e:
            record["errors"]["simulation"] = self._handle_error(e, stem)
            return record
        record["reflections"] = result.reflections
        lh = series["H"]
        report.series.update(series_entries(stem, series))
        if spec.dump_trajectory:
            report.tables[f"{stem}/trajectory.csv"] = result.trajectories_csv()

        floor = control_h = None
        try:
            control, floors = equilibrium_control(
                model, spec, self.config, spec.control_t_end, stem, boundary=BOUNDARY
            )
            floor = floors["H"]
            control_h = control["H"]
            report.series.update(series_entries(stem, control, tag="control"))
        except BornLensException as e:
            record["errors"]["control"] = self._handle_error(e, f"{stem} control")
        record["noise_floor_H"] = floor

        prominence = spec.phase_prominence
        if control_h is not None:
            try:
                prominence = max(prominence, NOISE_SIGMAS * log_scatter(control_h))
            except BornLensException as e:
                logger.warning("%s: no scatter from the control run (%s)", stem, e)
        record["phase_prominence"] = prominence
        try:
            record["tau1"], record["tau2"] = detect_phase_boundaries(
                lh, window=spec.median_window, min_prominence=prominence,
                floor=spec.floor_factor * floor if floor is not None else None,
            )
        except BornLensException as e:
            record["tau1"] = record["tau2"] = None
            record["errors"]["phases"] = self._handle_error(e, f"{stem} phases")

        record["tau_q"] = None
        if floor is not None:
            try:
                record["tau_q"] = floor_crossing_time(lh, floor, spec.floor_factor)
            except BornLensException as e:
                record["errors"]["tau_q"] = self._handle_error(e, f"{stem} tau_q")

        self._ratios(spec, record)
        for key in ("tau1", "tau2", "tau_q"):
            if record.get(key) is not None:
                record[f"{key}_ms"] = record[key] * units["t0_ms"]

        hlines = [(spec.floor_factor * floor, f"{spec.floor_factor:g} x floor")] if floor else []
        report.plots[f"{stem}/distances"] = distance_plot(
            {"H": (lh.times, lh.values)}, title=f"gravity, h = {h:g}", hlines=hlines
        )
        for wanted, (t, empirical, born) in sorted(observer.snapshots.items()):
            report.plots[f"{stem}/snapshot_t={wanted:g}"] = overlay_plot(
                empirical.x, empirical.y, born.y, title=f"h = {h:g}, t = {t:.4g}"
            )
        if spec.dump_trajectory:
            rows = result.trajectory_rows
            report.plots[f"{stem}/trajectory"] = PlotRequest(
                [Curve("x(t)", [r[1] for r in rows], [r[2] for r in rows])],
                StyleSpec(title=f"one trajectory, h = {h:g}", ylabel="x"),
            )
        logger.info(
            "gravity h=%g: tau1=%s tau2=%s tau_q=%s ratio=%s",
            h, record.get("tau1"), record.get("tau2"), record["tau_q"], record.get("ratio"),
        )
        return record

    @staticmethod
    def _ratios(spec: GravitySpec, record: Dict[str, Any]):
        """tau_int/tau1 at the reference prominence; min/max over it and the band prominences"""
        tau1 = record.get("tau1")
        found = {p: t for p, t in record["tau_int"].items() if not isinstance(t, str)}
        record["tau_int"] = {f"{p:g}": t for p, t in record["tau_int"].items()}
        reference = found.get(spec.reference_p)
        if not tau1 or reference is None:
            record["ratio"] = None
            return
        ratios = [found[p] / tau1 for p in {spec.reference_p, *spec.band_p} if p in found]
        record["ratio"] = reference / tau1
        record["ratio_min"] = min(ratios)
        record["ratio_max"] = max(ratios)
