"""
Superposition study: a small admixture of the ground state opens the node of
the first excited state and lets a delta start relax.
"""

import logging
import math
from typing import Any, Dict

from ..base_study import BaseStudy, StudyReport
from ..config import SuperpositionSpec
from ..exceptions import BornLensException
from ..models import OscillatorEigenModel
from ..plotting import distance_plot
from ..registry import register_study
from ..sde import Ensemble, derive_seed
from ..stats import floor_crossing_time
from ..utils import param_dir
from .common import equilibrium_control, run_distances, series_entries

logger = logging.getLogger(__name__)

PERIOD = math.pi


@register_study("superposition")
class SuperpositionStudy(BaseStudy):
    """L_H relaxation of cos(angle) psi_1 + sin(angle) psi_0 from a delta start"""

    spec_class = SuperpositionSpec

    def run(self, spec: SuperpositionSpec) -> StudyReport:
        report = self.new_report(spec)
        for angle in sorted(spec.mix_angle_deg):
            report.points.append(self._run_point(spec, angle, report))
        return report

    def _run_point(self, spec: SuperpositionSpec, angle: float, report: StudyReport) -> Dict[str, Any]:
        model = OscillatorEigenModel.from_degrees(angle)
        stem = param_dir("mix_angle_deg", angle)
        record: Dict[str, Any] = {"mix_angle_deg": angle, "start": spec.start, "errors": {}}
        logger.info("superposition: mix angle %g deg", angle)

        ensemble = Ensemble.delta(spec.n, spec.start, master_seed=derive_seed(spec.master_seed, stem))
        try:
            series, _, _ = run_distances(model, ensemble, spec, self.config, spec.t_end)
        except BornLensException as e:
            record["errors"]["simulation"] = self._handle_error(e, stem)
            return record
        report.series.update(series_entries(stem, series))

        floor = None
        if spec.control:
            try:
                control, floors = equilibrium_control(model, spec, self.config, spec.control_t_end, stem)
                floor = floors["H"]
                report.series.update(series_entries(stem, control, tag="control"))
            except BornLensException as e:
                record["errors"]["control"] = self._handle_error(e, f"{stem} control")
        record["noise_floor_H"] = floor

        record["tau_q"] = None
        if floor is not None:
            try:
                tau_q = floor_crossing_time(series["H"], floor, spec.floor_factor)
                record["tau_q"] = tau_q
                record["tau_q_over_period"] = tau_q / PERIOD
            except BornLensException as e:
                record["errors"]["tau_q"] = self._handle_error(e, f"{stem} tau_q")

        hlines = [(spec.floor_factor * floor, f"{spec.floor_factor:g} x floor")] if floor else []
        report.plots[f"{stem}/distances"] = distance_plot(
            {"H": (series["H"].times, series["H"].values)},
            title=f"mix angle {angle:g} deg",
            hlines=hlines,
        )
        logger.info("superposition %g deg: tau_q=%s", angle, record["tau_q"])
        return record
