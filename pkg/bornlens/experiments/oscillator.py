"""
Oscillator study: relaxation time of a delta start in the harmonic well from
the semi-analytic gamma(t) = C(t)/B(t) pipeline, with one Monte Carlo run
checking the Fokker-Planck precision C(t).
"""

import logging
import math
from typing import Any, Dict, List

import numpy as np

from ..base_study import BaseStudy, StudyReport
from ..config import OscillatorSpec
from ..exceptions import BornLensException
from ..models import OscillatorGaussianModel, fokker_planck_precision, gamma_series, oscillator_series
from ..plotting import Curve, PlotRequest, StyleSpec
from ..registry import register_study
from ..sde import Ensemble, derive_seed, simulate
from ..stats import sliding_rms, threshold_time
from ..utils import param_dir
from .common import integrator_for

logger = logging.getLogger(__name__)

#: acceptance band of the Monte Carlo check, in standard errors
MC_SIGMAS = 3.0


def relaxation_times(model: OscillatorGaussianModel, spec: OscillatorSpec) -> Dict[str, Any]:
    """
    gamma, phi and Theta on the grid k * gamma_step and tau_q for every
    threshold in the spec

    Returns:
        {"times", "gamma", "phi", "theta", "tau_q": {threshold: time or error text}}
    """
    count = int(round(spec.t_end / spec.gamma_step))
    times = spec.gamma_step * np.arange(1, count + 1)
    gamma, phi = gamma_series(lambda t: model.state(t).B, times)
    theta = sliding_rms(gamma, spec.window)
    taus: Dict[float, Any] = {}
    for threshold in sorted(spec.theta):
        try:
            taus[threshold] = threshold_time(times, theta, threshold, ignore_tail=spec.window // 2)
        except BornLensException as e:
            taus[threshold] = f"{type(e).__name__}: {e}"
    return {"times": times, "gamma": gamma, "phi": phi, "theta": theta, "tau_q": taus}


def monte_carlo_precision(spec: OscillatorSpec, threads: int, stream_block: int) -> Dict[str, Any]:
    """
    Inverse variance of a simulated delta-start ensemble against C(t) at
    evenly spaced checkpoints

    The standard error of 1/v from N samples is (1/v) sqrt(2/(N-1)).
    """
    model = OscillatorGaussianModel(spec.monte_carlo_b0, A0=spec.A0)
    seed = derive_seed(spec.master_seed, f"monte-carlo/b0={spec.monte_carlo_b0:g}")
    result = simulate(
        Ensemble.delta(spec.n, 0.0, master_seed=seed),
        model.drift,
        t_end=spec.mc_t_end,
        observe_every=spec.observe_every,
        config=integrator_for(model, spec),
        observer=lambda snap: float(np.var(snap.positions)),
        threads=threads,
        stream_block=stream_block,
    )
    times = result.times()
    variances = np.array(result.values())
    wanted = spec.mc_t_end * np.arange(1, spec.checkpoints + 1) / spec.checkpoints
    indices = [int(np.argmin(np.abs(times - t))) for t in wanted]
    checkpoint_times = times[indices]
    expected, _ = fokker_planck_precision(spec.A0, spec.monte_carlo_b0, checkpoint_times)
    rows = []
    for t, idx, c in zip(checkpoint_times, indices, expected):
        empirical = 1.0 / variances[idx]
        stderr = empirical * math.sqrt(2.0 / (spec.n - 1))
        rows.append({
            "t": float(t),
            "empirical": float(empirical),
            "expected": float(c),
            "stderr": stderr,
            "within": bool(abs(empirical - c) <= MC_SIGMAS * stderr),
        })
    with np.errstate(divide="ignore"):
        precision = 1.0 / variances
    return {
        "b0": spec.monte_carlo_b0,
        "checkpoints": rows,
        "all_within": all(r["within"] for r in rows),
        "series": (times, precision),
    }


@register_study("oscillator")
class OscillatorStudy(BaseStudy):
    """tau_q(sigma0, theta) from the Theta threshold, Monte Carlo cross-check of C(t)"""

    spec_class = OscillatorSpec

    def run(self, spec: OscillatorSpec) -> StudyReport:
        report = self.new_report(spec)
        stride = max(1, int(round(spec.series_every / spec.gamma_step)))
        curves: Dict[float, List] = {th: [] for th in spec.theta}
        for b0 in sorted(spec.b0):
            sigma0 = math.sqrt(2.0 / b0)
            stem = param_dir("b0", b0)
            model = OscillatorGaussianModel(b0, A0=spec.A0, t_max=spec.t_end + 1.0)
            try:
                pipeline = relaxation_times(model, spec)
            except BornLensException as e:
                report.points.append({"b0": b0, "sigma0": sigma0, "error": self._handle_error(e, stem)})
                continue
            for threshold, tau in pipeline["tau_q"].items():
                point = {"b0": b0, "sigma0": sigma0, "theta": threshold}
                if isinstance(tau, str):
                    point["tau_q"] = None
                    point["error"] = tau
                    logger.warning("%s (b0=%g theta=%g) %s", self.name, b0, threshold, tau)
                else:
                    point["tau_q"] = tau
                    point["tau_q_over_period"] = tau / (0.5 * math.pi)
                    curves[threshold].append((sigma0, tau))
                report.points.append(point)
            logger.info("oscillator b0=%g: tau_q %s", b0, pipeline["tau_q"])

            times = pipeline["times"]
            sel = slice(stride - 1, None, stride)
            A, a_phase, B = oscillator_series(spec.A0, b0, 0.0, times[sel])
            entries = {
                "A": A, "a": a_phase, "B": B,
                "gamma": pipeline["gamma"][sel], "phi": pipeline["phi"][sel], "Theta": pipeline["theta"][sel],
            }
            for name, values in entries.items():
                report.series[f"{stem}/series_{name}"] = (times[sel], values)
            report.plots[f"{stem}/theta"] = PlotRequest(
                [Curve("Theta", times[sel], pipeline["theta"][sel])],
                StyleSpec(
                    title=f"B0 = {b0:g}",
                    ylabel="Theta",
                    log_y=True,
                    hlines=[(th, f"theta = {th:g}") for th in sorted(spec.theta)],
                ),
            )

        sat = [Curve(f"theta = {k:g}", [s for s, _ in v], [t for _, t in v], linestyle="o-")
               for k, v in sorted(curves.items()) if len(v) >= 2]
        if sat:
            sat.append(Curve("pi/4", [min(min(c.x) for c in sat), max(max(c.x) for c in sat)],
                             [0.25 * math.pi] * 2, linestyle=":"))
            report.plots["tau_q_vs_sigma0"] = PlotRequest(sat, StyleSpec(title="tau_q against sigma0", xlabel="sigma0", ylabel="tau_q"))

        if spec.monte_carlo_b0 is not None:
            try:
                check = monte_carlo_precision(spec, self.config.worker_count(), self.config.stream_block)
                times, precision = check.pop("series")
                report.summary["monte_carlo"] = check
                report.series[f"{param_dir('monte_carlo_b0', spec.monte_carlo_b0)}/series_precision"] = (times[1:], precision[1:])
                logger.info("oscillator Monte Carlo check: all_within=%s", check["all_within"])
            except BornLensException as e:
                report.summary["monte_carlo"] = {"error": self._handle_error(e, "monte carlo")}
        return report
