"""
Double-slit study: relaxation of a delta-pair ensemble towards |psi|^2
compared with the time the interference fringe appears.
"""

import logging
import math
from typing import Any, Dict, List, Tuple

import numpy as np

from ..base_study import BaseStudy, StudyReport
from ..config import DoubleSlitSpec
from ..exceptions import BornLensException
from ..models import DoubleSlitModel
from ..plotting import Curve, PlotRequest, StyleSpec, distance_plot, overlay_plot
from ..registry import register_study
from ..sde import Ensemble, derive_seed, simulate
from ..stats import (
    DISTANCE_KINDS,
    DistanceSeries,
    SampledCurve,
    detect_interference_double_slit,
    fit_relaxation,
    fit_tanh,
    relaxation_curve,
    tanh_curve,
)
from ..utils import param_dir
from .common import equilibrium_control, integrator_for, run_distances, series_entries

logger = logging.getLogger(__name__)

#: resolution of the analytic density scan
SCAN_POINTS = 2401
FANOUT_OBSERVE_EVERY = 5e-3


def interference_time(model: DoubleSlitModel, dt: float, horizon: float, min_relative_height: float) -> float:
    """
    Scan |psi|^2 on [-3a, 3a] (widened to the packet support) every dt up to
    the horizon and return the first time an interior maximum appears
    """
    steps = int(math.floor(horizon / dt + 1e-9))
    curves = []
    for k in range(steps + 1):
        t = k * dt
        lo, hi = model.support(t)
        half = max(3.0 * model.a, hi, -lo)
        grid = np.linspace(-half, half, SCAN_POINTS)
        curves.append((t, SampledCurve(grid, model.density(grid, t))))
    return detect_interference_double_slit(curves, min_relative_height=min_relative_height)


def relaxation_prefix(series: DistanceSeries, floor: float) -> DistanceSeries:
    """Leading part of a series up to the first value within 2x the floor"""
    finite = series.finite()
    reached = np.flatnonzero(finite.values <= 2.0 * floor)
    if reached.size == 0:
        return finite
    return finite.until(float(finite.times[int(reached[0])]))


@register_study("double-slit")
class DoubleSlitStudy(BaseStudy):
    """
    For every slit width: tau_q per distance kind from the double-exponential
    fit, tau_int from the analytic density, and tanh fits across widths
    """

    spec_class = DoubleSlitSpec

    def run(self, spec: DoubleSlitSpec) -> StudyReport:
        report = self.new_report(spec)
        for sigma in sorted(spec.sigma):
            logger.info("double-slit: sigma=%g", sigma)
            report.points.append(self._run_point(spec, sigma, report))
        fits, curves = self._tanh_fits(report.points)
        report.summary["tanh_fits"] = fits
        if curves:
            report.plots["times_vs_sigma"] = PlotRequest(
                curves, StyleSpec(title="times against slit width", xlabel="sigma", ylabel="t")
            )
        report.summary["ordering_holds"] = all(p.get("ordering_holds") for p in report.points)
        return report

    def _run_point(self, spec: DoubleSlitSpec, sigma: float, report: StudyReport) -> Dict[str, Any]:
        model = DoubleSlitModel(sigma)
        stem = param_dir("sigma", sigma)
        record: Dict[str, Any] = {"sigma": sigma, "errors": {}}

        try:
            record["tau_int"] = interference_time(
                model, spec.interference_dt, spec.interference_horizon, spec.min_relative_height
            )
        except BornLensException as e:
            record["tau_int"] = None
            record["errors"]["tau_int"] = self._handle_error(e, f"sigma={sigma:g} tau_int")

        seed = derive_seed(spec.master_seed, stem)
        ensemble = Ensemble.delta_pair(spec.n, model.a, master_seed=seed)
        try:
            series, observer, _ = run_distances(
                model, ensemble, spec, self.config, spec.t_end, snapshot_times=spec.snapshot_times
            )
        except BornLensException as e:
            record["errors"]["simulation"] = self._handle_error(e, f"sigma={sigma:g} simulate")
            record["ordering_holds"] = False
            return record
        report.series.update(series_entries(stem, series))

        floors = {kind: None for kind in DISTANCE_KINDS}
        if spec.control:
            try:
                control, floors = equilibrium_control(model, spec, self.config, spec.control_t_end, stem)
                report.series.update(series_entries(stem, control, tag="control"))
            except BornLensException as e:
                record["errors"]["control"] = self._handle_error(e, f"sigma={sigma:g} control")
        record["noise_floor"] = floors

        record["tau_q"], record["fit"] = {}, {}
        for kind in DISTANCE_KINDS:
            fitted = relaxation_prefix(series[kind], floors[kind]) if floors[kind] else series[kind]
            try:
                fit = fit_relaxation(fitted)
                record["tau_q"][kind] = fit.tau_q
                record["fit"][kind] = fit.to_dict()
                report.series[f"{stem}/fit_{kind}"] = (fitted.times, relaxation_curve(fit.params, fitted.times))
            except BornLensException as e:
                record["tau_q"][kind] = None
                record["errors"][f"fit_{kind}"] = self._handle_error(e, f"sigma={sigma:g} fit {kind}")

        tau_int = record["tau_int"]
        taus = list(record["tau_q"].values())
        record["ordering_holds"] = tau_int is not None and all(t is not None and t < tau_int for t in taus)

        hlines = [(floors["L1"], "L1 floor")] if floors["L1"] else []
        report.plots[f"{stem}/distances"] = distance_plot(
            {k: (s.times, s.values) for k, s in series.items()},
            title=f"double slit, sigma = {sigma:g}",
            hlines=hlines,
        )
        for wanted, (t, empirical, born) in sorted(observer.snapshots.items()):
            report.plots[f"{stem}/snapshot_t={wanted:g}"] = overlay_plot(
                empirical.x, empirical.y, born.y, title=f"sigma = {sigma:g}, t = {t:.4g}"
            )
        if spec.fanout:
            self._fanout(spec, model, stem, report)
        logger.info("double-slit sigma=%g: tau_int=%s tau_q=%s", sigma, tau_int, record["tau_q"])
        return record

    def _fanout(self, spec: DoubleSlitSpec, model: DoubleSlitModel, stem: str, report: StudyReport):
        """Trajectories of a small delta-pair ensemble for the fan-out picture"""
        ensemble = Ensemble.delta_pair(spec.fanout, model.a, master_seed=derive_seed(spec.master_seed, f"fanout/{stem}"))
        result = simulate(
            ensemble,
            model.drift,
            t_end=spec.t_end,
            observe_every=max(spec.observe_every, FANOUT_OBSERVE_EVERY),
            config=integrator_for(model, spec),
            observer=lambda snap: None,
            threads=self.config.worker_count(),
            stream_block=self.config.stream_block,
            record_ids=range(spec.fanout),
        )
        report.tables[f"{stem}/trajectories.csv"] = result.trajectories_csv()

    def _tanh_fits(self, points: List[Dict[str, Any]]) -> Tuple[Dict[str, Any], List[Curve]]:
        fits: Dict[str, Any] = {}
        columns = {"tau_int": [(p["sigma"], p.get("tau_int")) for p in points]}
        for kind in DISTANCE_KINDS:
            columns[kind] = [(p["sigma"], p.get("tau_q", {}).get(kind)) for p in points]
        curves = []
        for name, pairs in columns.items():
            usable = [(s, t) for s, t in pairs if t is not None]
            try:
                fit = fit_tanh([s for s, _ in usable], [t for _, t in usable])
                fits[name] = fit.to_dict()
                grid = np.linspace(min(s for s, _ in usable), max(s for s, _ in usable), 200)
                curves.append(Curve(f"{name} fit", grid, tanh_curve(fit.params, grid), linestyle="--"))
            except BornLensException as e:
                fits[name] = {"error": self._handle_error(e, f"tanh fit {name}")}
            if len(usable) >= 2:
                curves.append(Curve(name, [s for s, _ in usable], [t for _, t in usable], linestyle="o-"))
        return fits, curves
