"""
Nelson-Langevin integrator: dx = b(x, t) dt + dW with <dW^2> = 2 D_Q dt.

Trajectories are grouped into lanes of ``stream_block`` consecutive ids. Each
lane owns one counter-based random stream derived from (master seed, lane id)
and is always advanced as one unit, so the split of lanes over worker threads
never changes a single bit of the result.
"""

import hashlib
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .base_model import WavefunctionModel
from .exceptions import BlowUp, NodeSingularity, ValidationException

logger = logging.getLogger(__name__)

DriftFunction = Callable[[np.ndarray, float], np.ndarray]

SCHEMES = ("heun", "euler-maruyama")
BOUNDARIES = ("none", "reflect-at-zero")
#: stream channel of the Wiener increments; sampling uses its own channel
NOISE_CHANNEL = 0
SAMPLING_CHANNEL = 1


@dataclass(frozen=True)
class IntegratorConfig:
    """Time step, diffusion coefficient, scheme and boundary handling"""

    dt: float
    d_q: float
    scheme: str = "heun"
    boundary: str = "none"
    node_guard: float = 1e-12
    blowup_limit: float = 1e6

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValidationException(f"dt must be positive, got {self.dt}")
        if not self.d_q > 0.0:
            raise ValidationException(f"D_Q must be positive, got {self.d_q}")
        if self.scheme not in SCHEMES:
            raise ValidationException(f"Unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.boundary not in BOUNDARIES:
            raise ValidationException(f"Unknown boundary {self.boundary!r}; expected one of {BOUNDARIES}")

    @classmethod
    def for_model(cls, model: WavefunctionModel, dt: float, **kwargs) -> "IntegratorConfig":
        return cls(dt=dt, d_q=model.diffusion, **kwargs)


@dataclass
class Ensemble:
    """
    N particle positions at a common time; trajectory ids are 0..N-1
    """

    positions: np.ndarray
    t: float = 0.0
    master_seed: int = 0

    def __post_init__(self):
        self.positions = np.array(self.positions, dtype=float).reshape(-1)
        if self.positions.size < 1:
            raise ValidationException("an ensemble needs at least one particle")
        if not np.all(np.isfinite(self.positions)):
            raise ValidationException("ensemble positions must be finite")

    @property
    def n(self) -> int:
        return int(self.positions.size)

    @classmethod
    def delta(cls, n: int, x0: float, t: float = 0.0, master_seed: int = 0) -> "Ensemble":
        """All n particles at x0"""
        return cls(np.full(n, float(x0)), t=t, master_seed=master_seed)

    @classmethod
    def delta_pair(cls, n: int, a: float, t: float = 0.0, master_seed: int = 0) -> "Ensemble":
        """Half the particles at +a and half at -a"""
        half = n // 2
        positions = np.concatenate([np.full(half, float(a)), np.full(n - half, -float(a))])
        return cls(positions, t=t, master_seed=master_seed)

    def snapshot(self) -> "Ensemble":
        """Read-only copy"""
        copy = Ensemble(self.positions.copy(), t=self.t, master_seed=self.master_seed)
        copy.positions.setflags(write=False)
        return copy


@dataclass
class SimulationResult:
    """Final ensemble, observation log and event counters"""

    ensemble: Ensemble
    observations: List[Tuple[float, Any]] = field(default_factory=list)
    reflections: int = 0
    crossings: int = 0
    steps: int = 0
    trajectory_ids: Tuple[int, ...] = ()
    trajectory_rows: List[Tuple[int, float, float]] = field(default_factory=list)

    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.observations])

    def values(self) -> List[Any]:
        return [value for _, value in self.observations]

    def trajectories_csv(self) -> str:
        """Trajectory dump as CSV text with header trajectory_id,t,x"""
        lines = ["trajectory_id,t,x"]
        lines.extend(f"{i},{t!r},{x!r}" for i, t, x in self.trajectory_rows)
        return "\n".join(lines) + "\n"


def rng_stream(master_seed: int, stream_id: int, channel: int = NOISE_CHANNEL) -> np.random.Generator:
    """
    Independent, reproducible random stream for one (seed, id) pair

    Philox is counter based; SeedSequence spawn keys keep distinct ids on
    statistically independent streams.

    Args:
        master_seed: 64-bit master seed
        stream_id: Lane (or trajectory) identifier
        channel: Separates noise from auxiliary draws of the same id

    Returns:
        numpy Generator
    """
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(stream_id), int(channel)))
    return np.random.Generator(np.random.Philox(seq))


def derive_seed(master_seed: int, label: str) -> int:
    """
    64-bit seed for a named sub-run (a grid point or a control)

    The label is hashed into a SeedSequence spawn key, so the same label
    always gets the same stream whatever else runs in the study.
    """
    key = int.from_bytes(hashlib.sha256(label.encode("utf-8")).digest()[:8], "little")
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(key,))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def wiener_increment(stream: np.random.Generator, dt: float, d_q: float, size: Optional[int] = None):
    """
    Gaussian increment with mean 0 and variance 2 D_Q dt

    Args:
        stream: Random stream
        dt: Time step (>= 0)
        d_q: Diffusion coefficient
        size: None for a scalar, else the number of draws
    """
    if dt < 0.0:
        raise ValidationException(f"dt must be >= 0, got {dt}")
    if dt == 0.0:
        return 0.0 if size is None else np.zeros(size)
    scale = math.sqrt(2.0 * d_q * dt)
    if size is None:
        return float(stream.normal(0.0, scale))
    return stream.normal(0.0, scale, size)


def _reflect(x: np.ndarray, config: IntegratorConfig) -> int:
    if config.boundary != "reflect-at-zero":
        return 0
    below = x < 0.0
    count = int(np.count_nonzero(below))
    if count:
        np.negative(x, out=x, where=below)
    return count


def _advance(
    x: np.ndarray,
    t: float,
    t_next: float,
    drift: DriftFunction,
    config: IntegratorConfig,
    noise: np.ndarray,
) -> Tuple[np.ndarray, int]:
    """One scheme step on an array; returns (new positions, reflections)"""
    dt = config.dt
    b0 = drift(x, t)
    if config.scheme == "heun":
        predictor = x + b0 * dt + noise
        _reflect(predictor, config)
        b1 = drift(predictor, t_next)
        x_new = x + 0.5 * (b0 + b1) * dt + noise
    else:
        x_new = x + b0 * dt + noise
    reflections = _reflect(x_new, config)
    return x_new, reflections


def step(
    ensemble: Ensemble,
    drift: DriftFunction,
    config: IntegratorConfig,
    stream: np.random.Generator,
) -> Ensemble:
    """
    Advance a whole ensemble by one time step with a single stream

    Heun predictor-corrector (same increment in both stages) or
    Euler-Maruyama; the boundary is applied after the update.

    Args:
        ensemble: Current ensemble
        drift: b(x, t) evaluated on arrays
        config: Integrator settings
        stream: Random stream providing the increments

    Returns:
        Ensemble at t + dt
    """
    noise = wiener_increment(stream, config.dt, config.d_q, size=ensemble.n)
    t_next = ensemble.t + config.dt
    x_new, _ = _advance(ensemble.positions, ensemble.t, t_next, drift, config, noise)
    _check_blowup(x_new, np.arange(ensemble.n), t_next, config)
    return Ensemble(x_new, t=t_next, master_seed=ensemble.master_seed)


def _check_blowup(x: np.ndarray, ids: np.ndarray, t: float, config: IntegratorConfig):
    bad = ~np.isfinite(x) | (np.abs(x) > config.blowup_limit)
    if np.any(bad):
        first = int(np.flatnonzero(bad)[0])
        raise BlowUp(
            f"trajectory {int(ids[first])} left |x| <= {config.blowup_limit:g} at t = {t:.6g} (x = {x[first]:.6g})",
            trajectory_id=int(ids[first]),
            t=t,
        )


class _Lane:
    """A fixed block of trajectory ids with its own stream"""

    def __init__(self, lane_id: int, start: int, stop: int, master_seed: int):
        self.lane_id = lane_id
        self.ids = np.arange(start, stop)
        self.slice = slice(start, stop)
        self.stream = rng_stream(master_seed, lane_id)
        self.reflections = 0
        self.crossings = 0

    def advance(self, positions: np.ndarray, t: float, t_next: float, drift, config) -> Optional[Exception]:
        x = positions[self.slice]
        noise = wiener_increment(self.stream, config.dt, config.d_q, size=len(self.ids))
        try:
            x_new, reflections = _advance(x, t, t_next, drift, config, noise)
            _check_blowup(x_new, self.ids, t_next, config)
        except NodeSingularity as e:
            return self._locate(e, x, t)
        except BlowUp as e:
            return e
        self.reflections += reflections
        self.crossings += int(np.count_nonzero((x > 0.0) != (x_new > 0.0)))
        positions[self.slice] = x_new
        return None

    def _locate(self, error: NodeSingularity, x: np.ndarray, t: float) -> NodeSingularity:
        trajectory_id = None
        if error.x is not None:
            hits = np.flatnonzero(x == error.x)
            if len(hits):
                trajectory_id = int(self.ids[hits[0]])
        when = error.t if error.t is not None else t
        where = f"trajectory {trajectory_id}" if trajectory_id is not None else f"lane {self.lane_id}"
        return NodeSingularity(f"{where} at t = {when:.6g}: {error}", x=error.x, t=when, trajectory_id=trajectory_id)


def _make_lanes(n: int, master_seed: int, stream_block: int) -> List[_Lane]:
    if stream_block < 1:
        raise ValidationException(f"stream_block must be >= 1, got {stream_block}")
    return [
        _Lane(lane_id, start, min(start + stream_block, n), master_seed)
        for lane_id, start in enumerate(range(0, n, stream_block))
    ]


def _group(lanes: List[_Lane], workers: int) -> List[List[_Lane]]:
    workers = max(1, min(workers, len(lanes)))
    size = int(math.ceil(len(lanes) / workers))
    return [lanes[i:i + size] for i in range(0, len(lanes), size)]


def simulate(
    ensemble0: Ensemble,
    drift: DriftFunction,
    t_end: float,
    observe_every: float,
    config: IntegratorConfig,
    observer: Optional[Callable[[Ensemble], Any]] = None,
    threads: int = 1,
    stream_block: int = 1024,
    record_ids: Optional[Sequence[int]] = None,
) -> SimulationResult:
    """
    Integrate an ensemble from its current time to t_end

    Args:
        ensemble0: Initial ensemble (not modified)
        drift: b(x, t) evaluated on arrays
        t_end: Final time
        observe_every: Observation interval (>= dt)
        config: Integrator settings
        observer: Called with a read-only snapshot at every observation time
            (including the start and the end); its return values form the
            observation log. Without an observer the snapshots are logged.
        threads: Worker threads; never changes the result
        stream_block: Trajectories per random lane
        record_ids: Trajectory ids dumped at every observation

    Returns:
        SimulationResult

    Raises:
        BlowUp or NodeSingularity with trajectory id and time
    """
    t0 = ensemble0.t
    if not t_end > t0:
        raise ValidationException(f"t_end ({t_end}) must exceed the start time ({t0})")
    if observe_every < config.dt * (1.0 - 1e-12):
        raise ValidationException(f"observe_every ({observe_every}) must be >= dt ({config.dt})")
    if config.boundary == "reflect-at-zero" and np.any(ensemble0.positions <= 0.0):
        raise ValidationException("reflect-at-zero needs strictly positive initial positions")

    n_steps = int(round((t_end - t0) / config.dt))
    stride = max(1, int(round(observe_every / config.dt)))
    positions = ensemble0.positions.copy()
    lanes = _make_lanes(positions.size, ensemble0.master_seed, stream_block)
    groups = _group(lanes, threads)
    ids = tuple(sorted(int(i) for i in record_ids)) if record_ids else ()
    result = SimulationResult(ensemble=ensemble0, trajectory_ids=ids)

    def observe(k: int):
        t = t0 + k * config.dt
        snap = Ensemble(positions.copy(), t=t, master_seed=ensemble0.master_seed)
        snap.positions.setflags(write=False)
        result.observations.append((t, observer(snap) if observer else snap))
        for i in ids:
            result.trajectory_rows.append((i, t, float(positions[i])))

    def run_group(group: List[_Lane], t: float, t_next: float):
        return [lane.advance(positions, t, t_next, drift, config) for lane in group]

    logger.debug(
        "simulate: N=%d, %d steps of dt=%g, %d lanes on %d group(s), scheme=%s",
        positions.size, n_steps, config.dt, len(lanes), len(groups), config.scheme,
    )
    executor = ThreadPoolExecutor(max_workers=len(groups)) if len(groups) > 1 else None
    try:
        observe(0)
        report_every = max(1, n_steps // 10)
        for k in range(n_steps):
            t, t_next = t0 + k * config.dt, t0 + (k + 1) * config.dt
            if executor is None:
                outcomes = run_group(groups[0], t, t_next)
            else:
                futures = [executor.submit(run_group, g, t, t_next) for g in groups]
                outcomes = [err for f in futures for err in f.result()]
            errors = [err for err in outcomes if err is not None]
            if errors:
                raise errors[0]
            if (k + 1) % stride == 0 or k + 1 == n_steps:
                observe(k + 1)
            if (k + 1) % report_every == 0:
                logger.debug("simulate: step %d/%d (t=%.4g)", k + 1, n_steps, t_next)
    finally:
        if executor is not None:
            executor.shutdown(wait=True)

    result.ensemble = Ensemble(positions, t=t0 + n_steps * config.dt, master_seed=ensemble0.master_seed)
    result.reflections = sum(lane.reflections for lane in lanes)
    result.crossings = sum(lane.crossings for lane in lanes)
    result.steps = n_steps
    return result


def sample_born(
    model: WavefunctionModel,
    n: int,
    stream: np.random.Generator,
    t: float = 0.0,
    grid_points: int = 20001,
) -> np.ndarray:
    """
    Draw n positions from |psi(., t)|^2 by inverse CDF on the model's support

    Args:
        model: Wavefunction model
        n: Number of samples
        stream: Random stream
        t: Time of the density
        grid_points: Resolution of the tabulated CDF

    Returns:
        Array of n positions
    """
    lo, hi = model.support(t)
    grid = np.linspace(lo, hi, grid_points)
    density = model.density(grid, t)
    cdf = cumulative_trapezoid(density, grid, initial=0.0)
    if not cdf[-1] > 0.0:
        raise ValidationException(f"{model.name} has no mass on its support at t = {t}")
    cdf /= cdf[-1]
    return np.interp(stream.random(n), cdf, grid)


def born_ensemble(model: WavefunctionModel, n: int, master_seed: int, t: float = 0.0) -> Ensemble:
    """Ensemble in quantum equilibrium at time t"""
    stream = rng_stream(master_seed, 0, channel=SAMPLING_CHANNEL)
    return Ensemble(sample_born(model, n, stream, t=t), t=t, master_seed=master_seed)
