"""
Pieces shared by the studies: the distance observer, equilibrium controls
and conversions from simulation logs to series
"""

import logging
import math
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from ..base_model import WavefunctionModel
from ..config import BornLensConfig, StudySpec
from ..exceptions import BornLensException
from ..sde import (
    Ensemble,
    IntegratorConfig,
    SimulationResult,
    born_ensemble,
    derive_seed,
    simulate,
)
from ..stats import DISTANCE_KINDS, DistanceSeries, SampledCurve, compare_to_born, distances, noise_floor

logger = logging.getLogger(__name__)


class DistanceObserver:
    """
    Observer for ``simulate``: distances between the ensemble histogram and
    |psi(., t)|^2, plus density snapshots at requested times
    """

    def __init__(
        self,
        model: WavefunctionModel,
        bins: int,
        snapshot_times: Sequence[float] = (),
        tolerance: float = 0.0,
    ):
        self.model = model
        self.bins = bins
        self.snapshot_times = tuple(snapshot_times)
        self.tolerance = tolerance
        self.snapshots: Dict[float, Tuple[float, SampledCurve, SampledCurve]] = {}
        self.failures = 0

    def __call__(self, ensemble: Ensemble) -> Dict[str, float]:
        try:
            empirical, born = compare_to_born(ensemble.positions, self.model, ensemble.t, self.bins)
            values = distances(empirical, born)
        except BornLensException as e:
            self.failures += 1
            logger.debug("%s: no distances at t=%.6g: %s", self.model.name, ensemble.t, e)
            return {kind: math.nan for kind in DISTANCE_KINDS}
        for wanted in self.snapshot_times:
            if wanted not in self.snapshots and abs(ensemble.t - wanted) <= self.tolerance:
                self.snapshots[wanted] = (ensemble.t, empirical, born)
        return values


def distance_series(result: SimulationResult, kinds: Iterable[str] = DISTANCE_KINDS) -> Dict[str, DistanceSeries]:
    """Split an observation log of distance dicts into one series per kind"""
    times = result.times()
    logged = result.values()
    return {kind: DistanceSeries(kind, times, [v[kind] for v in logged]) for kind in kinds}


def integrator_for(model: WavefunctionModel, spec: StudySpec, dt: Optional[float] = None, **kwargs) -> IntegratorConfig:
    return IntegratorConfig.for_model(model, spec.dt if dt is None else dt, scheme=spec.scheme, **kwargs)


def run_distances(
    model: WavefunctionModel,
    ensemble: Ensemble,
    spec: StudySpec,
    config: BornLensConfig,
    t_end: float,
    snapshot_times: Sequence[float] = (),
    record_ids: Optional[Sequence[int]] = None,
    **integrator_kwargs,
) -> Tuple[Dict[str, DistanceSeries], DistanceObserver, SimulationResult]:
    """Simulate an ensemble and measure all distance kinds along the way"""
    observer = DistanceObserver(model, spec.bins, snapshot_times, tolerance=0.5 * spec.observe_every)
    result = simulate(
        ensemble,
        model.drift,
        t_end=t_end,
        observe_every=spec.observe_every,
        config=integrator_for(model, spec, **integrator_kwargs),
        observer=observer,
        threads=config.worker_count(),
        stream_block=config.stream_block,
        record_ids=record_ids,
    )
    if observer.failures:
        logger.warning("%s: %d observation(s) without distances", model.name, observer.failures)
    return distance_series(result), observer, result


def equilibrium_control(
    model: WavefunctionModel,
    spec: StudySpec,
    config: BornLensConfig,
    t_end: float,
    label: str,
    **integrator_kwargs,
) -> Tuple[Dict[str, DistanceSeries], Dict[str, float]]:
    """
    Run an ensemble sampled from |psi(., 0)|^2 and measure its noise floor

    Returns:
        (distance series per kind, median level per kind)
    """
    seed = derive_seed(spec.master_seed, f"control/{label}")
    ensemble = born_ensemble(model, spec.n, seed)
    series, _, _ = run_distances(model, ensemble, spec, config, t_end, **integrator_kwargs)
    floors = {kind: noise_floor(s) for kind, s in series.items()}
    logger.info("%s control: floors %s", model.name, {k: f"{v:.3g}" for k, v in floors.items()})
    return series, floors


def series_entries(prefix: str, series: Dict[str, DistanceSeries], tag: str = "series") -> Dict[str, Tuple[np.ndarray, np.ndarray]]:
    """Report series entries ``<prefix>/<tag>_<kind>``"""
    return {f"{prefix}/{tag}_{kind}": (s.times, s.values) for kind, s in series.items()}

