"""
Barrier study: trajectories guided by the first excited oscillator state
should not cross its node; the fraction that does is a time-step artefact.
"""

import logging
import math
from typing import Any, Dict, List, Tuple

import numpy as np

from ..base_study import BaseStudy, StudyReport
from ..config import BarrierSpec
from ..exceptions import BornLensException, ValidationException
from ..models import OscillatorEigenModel
from ..plotting import Curve, PlotRequest, StyleSpec
from ..registry import register_study
from ..sde import Ensemble, derive_seed, simulate
from ..utils import param_dir
from .common import integrator_for

logger = logging.getLogger(__name__)


def far_side_fractions(positions: np.ndarray, starts: List[float], blocks: List[slice]) -> Tuple[float, ...]:
    """Fraction of each start block sitting on the other side of x = 0"""
    return tuple(
        float(np.count_nonzero(np.sign(positions[block]) != math.copysign(1.0, start))) / len(positions[block])
        for start, block in zip(starts, blocks)
    )


def start_blocks(n: int, starts: List[float]) -> Tuple[np.ndarray, List[slice]]:
    """Positions of a multi-start delta ensemble and the id range of each start"""
    per = n // len(starts)
    blocks = [slice(i * per, (i + 1) * per) for i in range(len(starts))]
    positions = np.concatenate([np.full(per, float(s)) for s in starts])
    return positions, blocks


@register_study("barrier")
class BarrierStudy(BaseStudy):
    """Crossing fraction of the node of the first excited state against dt"""

    spec_class = BarrierSpec

    def run(self, spec: BarrierSpec) -> StudyReport:
        report = self.new_report(spec)
        model = OscillatorEigenModel(mix_angle=0.0)
        starts = list(spec.starts)
        if any(s == 0.0 for s in starts):
            raise ValidationException("barrier starts must lie off the node at x = 0")
        finals: Dict[float, Dict[float, float]] = {}
        curves: List[Curve] = []

        for dt in sorted(spec.dt, reverse=True):
            n = spec.n if dt > spec.reduced_below_dt else min(spec.n, spec.reduced_n)
            stem = param_dir("dt", dt)
            positions, blocks = start_blocks(n, starts)
            logger.info("barrier: dt=%g, %d particles per start", dt, blocks[0].stop - blocks[0].start)
            ensemble = Ensemble(positions, master_seed=derive_seed(spec.master_seed, stem))
            try:
                result = simulate(
                    ensemble,
                    model.drift,
                    t_end=spec.t_end,
                    observe_every=max(spec.observe_every, dt),
                    config=integrator_for(model, spec, dt=dt, blowup_limit=spec.blowup_limit),
                    observer=lambda snap: far_side_fractions(snap.positions, starts, blocks),
                    threads=self.config.worker_count(),
                    stream_block=self.config.stream_block,
                )
            except BornLensException as e:
                message = self._handle_error(e, stem)
                report.points.extend({"dt": dt, "start": s, "error": message} for s in starts)
                continue

            times = result.times()
            logged = np.array(result.values())
            final = logged[-1]
            finals[dt] = {}
            for i, start in enumerate(starts):
                report.points.append({
                    "dt": dt,
                    "start": start,
                    "n": blocks[i].stop - blocks[i].start,
                    "far_side_fraction": float(final[i]),
                    "max_far_side_fraction": float(logged[:, i].max()),
                })
                finals[dt][start] = float(final[i])
                report.series[f"{stem}/{param_dir('start', start)}/series_far_side"] = (times, logged[:, i])
                curves.append(Curve(f"dt = {dt:g}, start = {start:g}", times, logged[:, i]))
            report.summary.setdefault("node_crossings", {})[f"{dt:g}"] = result.crossings
            logger.info("barrier dt=%g: far-side fractions %s", dt, finals[dt])

        report.summary["decreasing_with_dt"] = self._decreasing(finals, starts)
        if curves:
            report.plots["far_side"] = PlotRequest(
                curves, StyleSpec(title="fraction past the node", ylabel="fraction")
            )
        report.summary["control"] = self._control(spec, model)
        return report

    @staticmethod
    def _decreasing(finals: Dict[float, Dict[float, float]], starts: List[float]) -> Dict[str, Any]:
        """Whether the far-side fraction strictly drops as dt shrinks, per start"""
        ordered = sorted(finals, reverse=True)
        result = {}
        for start in starts:
            fractions = [finals[dt][start] for dt in ordered]
            result[f"{start:g}"] = len(fractions) > 1 and all(a > b for a, b in zip(fractions, fractions[1:]))
        return result

    def _control(self, spec: BarrierSpec, model: OscillatorEigenModel) -> Dict[str, Any]:
        """Short fine-step run that must stay on its own side of the node"""
        start = spec.control_start
        positions, blocks = start_blocks(spec.n, [start])
        ensemble = Ensemble(positions, master_seed=derive_seed(spec.master_seed, "control"))
        try:
            result = simulate(
                ensemble,
                model.drift,
                t_end=spec.control_t_end,
                observe_every=max(spec.control_dt, spec.control_t_end / 100.0),
                config=integrator_for(model, spec, dt=spec.control_dt, blowup_limit=spec.blowup_limit),
                observer=lambda snap: far_side_fractions(snap.positions, [start], blocks)[0],
                threads=self.config.worker_count(),
                stream_block=self.config.stream_block,
            )
        except BornLensException as e:
            return {"error": self._handle_error(e, "control")}
        worst = max(result.values())
        return {
            "dt": spec.control_dt,
            "t_end": spec.control_t_end,
            "start": start,
            "max_far_side_fraction": worst,
            "stayed_on_side": worst == 0.0,
        }
