"""
Statistics on ensembles: empirical densities, distances to the Born density,
relaxation fits, sliding-window convergence measures and detectors for
interference and phase boundaries.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid
from scipy.interpolate import PchipInterpolator
from scipy.ndimage import median_filter
from scipy.optimize import least_squares
from scipy.signal import find_peaks

from .base_model import WavefunctionModel
from .exceptions import (
    FitDiverged,
    GridMismatch,
    MonotoneSeries,
    NeverConverged,
    NoInterference,
    SupportMismatch,
    TooFewSamples,
    ValidationException,
)
from .utils import series_csv

logger = logging.getLogger(__name__)

DISTANCE_KINDS = ("L1", "L2", "Linf", "H")
INTERPOLATIONS = ("linear", "monotone-cubic")
#: densities at or below this are treated as empty in the H functional
DENSITY_FLOOR = 1e-12
MIN_SAMPLES = 100
MIN_MEAN_COUNT = 10.0


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SampledCurve:
    """A function tabulated on an increasing grid"""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValidationException(f"grid and values must be 1-D of equal length, got {x.shape} and {y.shape}")
        if x.size > 1 and np.any(np.diff(x) <= 0.0):
            raise ValidationException("grid must be strictly increasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def integral(self) -> float:
        return float(trapezoid(self.y, self.x))

    def normalized(self) -> "SampledCurve":
        total = self.integral()
        if not total > 0.0:
            raise ValidationException("cannot normalize a curve with zero integral")
        return SampledCurve(self.x, self.y / total)


@dataclass(frozen=True)
class DensityEstimate:
    """
    Histogram density at bin centers plus the interpolation used to
    evaluate it between centers
    """

    grid_edges: np.ndarray
    values: np.ndarray
    interpolation: str = "monotone-cubic"
    counted: int = 0

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.grid_edges[:-1] + self.grid_edges[1:])

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        xs = np.asarray(x, dtype=float)
        if self.interpolation == "linear":
            y = np.interp(xs, self.centers, self.values, left=0.0, right=0.0)
        else:
            y = PchipInterpolator(self.centers, self.values, extrapolate=True)(xs)
        inside = (xs >= self.grid_edges[0]) & (xs <= self.grid_edges[-1])
        return np.where(inside, np.clip(y, 0.0, None), 0.0)

    def sampled(self, x: np.ndarray) -> SampledCurve:
        """Interpolated density on a grid, renormalized to unit integral"""
        return SampledCurve(x, self.evaluate(x)).normalized()


@dataclass
class DistanceSeries:
    """Time series of one distance functional"""

    kind: str
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.kind not in DISTANCE_KINDS:
            raise ValidationException(f"unknown distance kind {self.kind!r}")
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape:
            raise ValidationException("times and values must have the same length")

    def __len__(self) -> int:
        return int(self.times.size)

    def finite(self) -> "DistanceSeries":
        keep = np.isfinite(self.values)
        return DistanceSeries(self.kind, self.times[keep], self.values[keep])

    def until(self, t: float) -> "DistanceSeries":
        keep = self.times <= t
        return DistanceSeries(self.kind, self.times[keep], self.values[keep])

    def to_csv(self) -> str:
        return series_csv(self.times, self.values)


@dataclass
class FitResult:
    """Fitted parameters and, for relaxation fits, the derived tau_q"""

    params: Dict[str, float]
    tau_q: Optional[float]
    residual_norm: float
    converged: bool
    extra: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, object]:
        return {
            "params": dict(self.params),
            "tau_q": self.tau_q,
            "residual_norm": self.residual_norm,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class Peak:
    x: float
    height: float
    prominence: float


# ---------------------------------------------------------------------------
# Densities and distances
# ---------------------------------------------------------------------------

def estimate_density(
    positions: np.ndarray,
    edges: np.ndarray,
    interpolation: str = "monotone-cubic",
) -> DensityEstimate:
    """
    Normalized histogram of the positions on fixed bin edges

    Args:
        positions: Particle positions
        edges: Increasing bin edges
        interpolation: "monotone-cubic" (PCHIP) or "linear"

    Returns:
        DensityEstimate

    Raises:
        TooFewSamples if fewer than 100 positions fall inside the grid or the
        mean count per occupied bin is below 10
    """
    if interpolation not in INTERPOLATIONS:
        raise ValidationException(f"unknown interpolation {interpolation!r}")
    edges = np.asarray(edges, dtype=float)
    counts, _ = np.histogram(np.asarray(positions, dtype=float), bins=edges)
    counted = int(counts.sum())
    if counted < MIN_SAMPLES:
        raise TooFewSamples(f"{counted} samples on the grid; need at least {MIN_SAMPLES}")
    occupied = int(np.count_nonzero(counts))
    if counted / occupied < MIN_MEAN_COUNT:
        raise TooFewSamples(
            f"mean count per occupied bin is {counted / occupied:.2f}; need {MIN_MEAN_COUNT:g}"
        )
    values = counts / (counted * np.diff(edges))
    return DensityEstimate(edges, values, interpolation, counted)


def _check_grid(f: SampledCurve, g: SampledCurve):
    if f.x.shape != g.x.shape or not np.array_equal(f.x, g.x):
        raise GridMismatch(f"curves are sampled on different grids ({f.x.size} vs {g.x.size} points)")


def lp_distance(f: SampledCurve, g: SampledCurve, p: int) -> float:
    """(integral |f - g|^p dx)^(1/p) by trapezoid quadrature, p in {1, 2}"""
    if p not in (1, 2):
        raise ValidationException(f"p must be 1 or 2, got {p}")
    _check_grid(f, g)
    return float(trapezoid(np.abs(f.y - g.y) ** p, f.x) ** (1.0 / p))


def linf_distance(f: SampledCurve, g: SampledCurve) -> float:
    _check_grid(f, g)
    return float(np.max(np.abs(f.y - g.y)))


def entropy_h(
    f: SampledCurve,
    g: SampledCurve,
    floor: float = DENSITY_FLOOR,
    clip_reference: bool = False,
) -> float:
    """
    integral f ln(f/g) dx; points with f <= floor contribute nothing

    Args:
        f: Empirical density
        g: Reference density
        floor: Density floor
        clip_reference: Raise g to the floor instead of rejecting points
            where f > floor >= g

    Raises:
        SupportMismatch if f > floor where g <= floor (unless clipped)
    """
    _check_grid(f, g)
    ref = np.maximum(g.y, floor) if clip_reference else g.y
    carries = f.y > floor
    mismatch = carries & (ref <= floor) if not clip_reference else np.zeros_like(carries)
    if np.any(mismatch):
        where = float(f.x[int(np.flatnonzero(mismatch)[0])])
        raise SupportMismatch(f"f carries mass where g vanishes (first at x = {where:g})")
    safe_f = np.where(carries, f.y, 1.0)
    safe_g = np.where(carries, ref, 1.0)
    integrand = np.where(carries, f.y * np.log(safe_f / safe_g), 0.0)
    return float(trapezoid(integrand, f.x))


def distances(p_curve: SampledCurve, born: SampledCurve) -> Dict[str, float]:
    """All four distance kinds between an empirical and a Born density"""
    return {
        "L1": lp_distance(p_curve, born, 1),
        "L2": lp_distance(p_curve, born, 2),
        "Linf": linf_distance(p_curve, born),
        "H": entropy_h(p_curve, born, clip_reference=True),
    }


def born_window(model: WavefunctionModel, t: float, coverage: float = 0.999, points: int = 8001) -> Tuple[float, float]:
    """Central interval holding ``coverage`` of |psi(., t)|^2"""
    lo, hi = model.support(t)
    grid = np.linspace(lo, hi, points)
    cdf = cumulative_trapezoid(model.density(grid, t), grid, initial=0.0)
    cdf /= cdf[-1]
    tail = 0.5 * (1.0 - coverage)
    return float(np.interp(tail, cdf, grid)), float(np.interp(1.0 - tail, cdf, grid))


def compare_to_born(
    positions: np.ndarray,
    model: WavefunctionModel,
    t: float,
    bins: int,
    refine: int = 4,
    interpolation: str = "monotone-cubic",
) -> Tuple[SampledCurve, SampledCurve]:
    """
    Empirical density and Born density on a common grid at time t

    Bins span the 99.9% support of |psi|^2; both curves are evaluated on a
    grid ``refine`` times finer than the bins and normalized on it.
    """
    lo, hi = born_window(model, t)
    if model.support(t)[0] == 0.0:
        lo = 0.0
    edges = np.linspace(lo, hi, bins + 1)
    estimate = estimate_density(positions, edges, interpolation=interpolation)
    grid = np.linspace(lo, hi, refine * bins + 1)
    born = SampledCurve(grid, model.density(grid, t)).normalized()
    return estimate.sampled(grid), born


# ---------------------------------------------------------------------------
# Fits
# ---------------------------------------------------------------------------

def fit_relaxation(series: DistanceSeries) -> FitResult:
    """
    Levenberg-Marquardt fit of ln L = ln a1 - a2 exp(a3 t)

    The start point takes a1 slightly above max L, then a straight-line fit
    of ln(-ln(L/a1)) against t for a3 and a2.

    Args:
        series: Positive distance values, at least 20 points

    Returns:
        FitResult with tau_q = 1/(a2 a3)
    """
    usable = series.finite()
    keep = usable.values > 0.0
    t = usable.times[keep]
    y = usable.values[keep]
    if t.size < 20:
        raise ValidationException(f"relaxation fit needs >= 20 positive points, got {t.size}")
    if y.max() < 10.0 * y.min():
        raise FitDiverged(
            f"{series.kind} series spans less than a decade ({y.min():.3g} .. {y.max():.3g})",
            params={},
        )
    log_y = np.log(y)
    a1 = 1.05 * y.max()
    slope, intercept = np.polyfit(t, np.log(-np.log(y / a1)), 1)
    start = np.array([math.log(a1), math.exp(intercept), slope])

    def residuals(theta):
        with np.errstate(over="ignore"):
            return theta[0] - theta[1] * np.exp(theta[2] * t) - log_y

    try:
        fit = least_squares(residuals, start, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=20000)
    except (ValueError, FloatingPointError) as e:
        raise FitDiverged(f"relaxation fit failed: {e}", params=_relaxation_params(start)) from e
    params = _relaxation_params(fit.x)
    residual_norm = float(np.linalg.norm(fit.fun))
    valid = (
        fit.success
        and np.all(np.isfinite(fit.x))
        and math.isfinite(residual_norm)
        and params["alpha1"] > 0.0
        and params["alpha2"] > 0.0
        and params["alpha3"] > 0.0
    )
    if not valid:
        raise FitDiverged(f"relaxation fit of {series.kind} did not converge: {fit.message}", params=params)
    tau_q = 1.0 / (params["alpha2"] * params["alpha3"])
    logger.debug("fit_relaxation %s: %s tau_q=%.5g nfev=%d", series.kind, params, tau_q, fit.nfev)
    return FitResult(params, tau_q, residual_norm, True)


def _relaxation_params(theta: np.ndarray) -> Dict[str, float]:
    return {"alpha1": float(math.exp(theta[0])), "alpha2": float(theta[1]), "alpha3": float(theta[2])}


def relaxation_curve(params: Dict[str, float], t: np.ndarray) -> np.ndarray:
    """a1 exp(-a2 exp(a3 t))"""
    return params["alpha1"] * np.exp(-params["alpha2"] * np.exp(params["alpha3"] * np.asarray(t)))


def tanh_curve(params: Dict[str, float], sigma: np.ndarray) -> np.ndarray:
    s2 = np.asarray(sigma) ** 2
    return params["beta1"] * np.tanh(params["beta2"] * s2 + params["beta3"]) + params["beta4"]


def fit_tanh(sigmas: Sequence[float], taus: Sequence[float]) -> FitResult:
    """
    Levenberg-Marquardt fit of tau(sigma) = b1 tanh(b2 sigma^2 + b3) + b4

    The sign symmetry (b1, b2, b3) -> -(b1, b2, b3) is fixed by b2 > 0.

    Args:
        sigmas: Widths
        taus: Times at those widths, at least 6 points
    """
    s = np.asarray(sigmas, dtype=float)
    y = np.asarray(taus, dtype=float)
    keep = np.isfinite(s) & np.isfinite(y)
    s, y = s[keep], y[keep]
    if s.size < 6:
        raise ValidationException(f"tanh fit needs >= 6 points, got {s.size}")
    s2 = s ** 2
    span = max(s2.max() - s2.min(), 1e-12)
    b2 = 2.0 / span
    b3 = -b2 * 0.5 * (s2.max() + s2.min())
    trend = np.sign(np.polyfit(s2, y, 1)[0]) or 1.0
    b1 = trend * max(0.5 * (y.max() - y.min()), 1e-12)
    start = np.array([b1, b2, b3, float(np.mean(y))])

    def residuals(beta):
        return beta[0] * np.tanh(beta[1] * s2 + beta[2]) + beta[3] - y

    fit = least_squares(residuals, start, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=20000)
    beta = fit.x.copy()
    if beta[1] < 0.0:
        beta[:3] = -beta[:3]
    params = {f"beta{i + 1}": float(v) for i, v in enumerate(beta)}
    residual_norm = float(np.linalg.norm(fit.fun))
    if not (fit.success and np.all(np.isfinite(beta)) and math.isfinite(residual_norm)):
        raise FitDiverged(f"tanh fit did not converge: {fit.message}", params=params)
    return FitResult(params, None, residual_norm, True)


# ---------------------------------------------------------------------------
# Window statistics
# ---------------------------------------------------------------------------

def sliding_rms(values: Sequence[float], window: int = 10) -> np.ndarray:
    """
    Root-mean-square deviation of the values inside a centred window of
    window + 1 points; windows shrink symmetrically at both ends

    Args:
        values: Series
        window: Even window parameter n

    Returns:
        Theta series of the same length
    """
    y = np.asarray(values, dtype=float)
    if window < 2 or window % 2:
        raise ValidationException(f"window must be an even number >= 2, got {window}")
    if y.size <= window:
        raise ValidationException(f"series of length {y.size} is too short for window {window}")
    half = window // 2
    theta = np.empty_like(y)
    views = np.lib.stride_tricks.sliding_window_view(y, window + 1)
    theta[half: y.size - half] = views.std(axis=1)
    for i in range(half):
        k = i
        theta[i] = y[i - k: i + k + 1].std()
        j = y.size - 1 - i
        theta[j] = y[j - k: j + k + 1].std()
    return theta


def threshold_time(
    times: Sequence[float],
    theta: Sequence[float],
    threshold: float,
    ignore_tail: int = 0,
) -> float:
    """
    First time after which the series stays below the threshold

    The crossing is interpolated linearly between the last sample at or
    above the threshold and the next one.

    Args:
        times: Sample times
        theta: Series values
        threshold: Positive threshold
        ignore_tail: Trailing samples left out of the test; pass window/2
            for a sliding_rms series, whose last windows are truncated

    Raises:
        NeverConverged if the last tested sample is not below the threshold
    """
    if not threshold > 0.0:
        raise ValidationException(f"threshold must be positive, got {threshold}")
    if ignore_tail < 0:
        raise ValidationException(f"ignore_tail must be >= 0, got {ignore_tail}")
    t = np.asarray(times, dtype=float)
    y = np.asarray(theta, dtype=float)
    if ignore_tail:
        if y.size <= ignore_tail + 1:
            raise ValidationException(f"series of length {y.size} is too short to drop {ignore_tail} samples")
        t, y = t[:-ignore_tail], y[:-ignore_tail]
    above = ~(y < threshold)
    if not np.any(above):
        return float(t[0])
    last = int(np.flatnonzero(above)[-1])
    if last == y.size - 1:
        raise NeverConverged(f"series never stays below {threshold:g}")
    t_a, t_b, y_a, y_b = t[last], t[last + 1], y[last], y[last + 1]
    if not math.isfinite(y_a) or y_a == y_b:
        return float(t_b)
    return float(t_a + (threshold - y_a) * (t_b - t_a) / (y_b - y_a))


def noise_floor(series: DistanceSeries) -> float:
    """Median level of an equilibrium-start control series"""
    values = series.finite().values
    if values.size == 0:
        raise ValidationException("cannot measure a noise floor on an empty series")
    return float(np.median(values))


def floor_crossing_time(series: DistanceSeries, floor: float, factor: float = 2.0) -> float:
    """First time the series enters and stays within factor x floor"""
    usable = series.finite()
    return threshold_time(usable.times, usable.values, factor * floor)


# ---------------------------------------------------------------------------
# Detectors
# ---------------------------------------------------------------------------

def _significant_maxima(y: np.ndarray, min_relative_height: float) -> np.ndarray:
    peaks, _ = find_peaks(y)
    if peaks.size == 0:
        return peaks
    return peaks[y[peaks] >= min_relative_height * y.max()]


def detect_interference_double_slit(
    curves: Sequence[Tuple[float, SampledCurve]],
    min_relative_height: float = 1e-3,
) -> float:
    """
    Earliest time with a local maximum strictly between the two outer maxima

    Only maxima reaching ``min_relative_height`` of the global maximum count.

    Args:
        curves: (t, density) pairs in increasing time, each covering [-3, 3]
            with time spacing <= 0.01

    Raises:
        NoInterference if no such time exists among the curves
    """
    if not curves:
        raise ValidationException("no density curves to scan")
    times = np.array([t for t, _ in curves])
    if times.size > 1 and np.max(np.diff(times)) > 0.01 + 1e-12:
        raise ValidationException("time resolution must be <= 0.01")
    for t, curve in curves:
        if curve.x[0] > -3.0 or curve.x[-1] < 3.0:
            raise ValidationException("density grid must cover [-3, 3]")
        maxima = _significant_maxima(curve.y, min_relative_height)
        if maxima.size >= 3:
            return float(t)
    raise NoInterference(f"no interior maximum up to t = {times[-1]:g}")


def detect_peaks_prominence(
    curve: SampledCurve,
    p: float,
    band: Tuple[float, float] = (0.0, 0.6),
) -> List[Peak]:
    """
    Peaks of the normalized curve whose height lies inside ``band`` and whose
    prominence, measured to the higher of the two neighbouring minima,
    exceeds p. Curve ends stand in for a missing neighbouring minimum.
    """
    if not p > 0.0:
        raise ValidationException(f"prominence threshold must be positive, got {p}")
    top = float(np.max(curve.y))
    if not top > 0.0:
        return []
    y = curve.y / top
    maxima, _ = find_peaks(y)
    minima, _ = find_peaks(-y)
    found = []
    for idx in maxima:
        height = y[idx]
        if not band[0] < height < band[1]:
            continue
        left = minima[minima < idx]
        right = minima[minima > idx]
        left_value = y[left[-1]] if left.size else y[0]
        right_value = y[right[0]] if right.size else y[-1]
        prominence = height - max(left_value, right_value)
        if prominence > p:
            found.append(Peak(float(curve.x[idx]), float(height), float(prominence)))
    return found


def interference_time_prominence(
    curves: Sequence[Tuple[float, SampledCurve]],
    p: float,
    min_peaks: int = 2,
    band: Tuple[float, float] = (0.0, 0.6),
    baseline: Optional[Sequence[Peak]] = None,
    tolerance: float = 0.05,
) -> float:
    """
    First time at which at least ``min_peaks`` prominent peaks sit in the band

    Args:
        curves: (t, curve) pairs in increasing time
        p: Prominence threshold
        min_peaks: Peaks needed to declare interference
        band: Normalized-height band searched for peaks
        baseline: Peaks present before the scan starts, e.g. truncation
            ripples of the initial density. They are followed from curve to
            curve and never count as interference.
        tolerance: Largest shift of a followed peak between two curves
    """
    followed = np.array([pk.x for pk in baseline or []], dtype=float)
    for t, curve in curves:
        peaks = detect_peaks_prominence(curve, p, band)
        fresh, kept = [], []
        for pk in peaks:
            if followed.size and np.min(np.abs(followed - pk.x)) <= tolerance:
                kept.append(pk.x)
            else:
                fresh.append(pk)
        if len(fresh) >= min_peaks:
            return float(t)
        followed = np.array(kept, dtype=float)
    raise NoInterference(f"fewer than {min_peaks} peaks with prominence > {p:g} in the scanned window")


def log_scatter(series: DistanceSeries) -> float:
    """Standard deviation of the log of an equilibrium-start control series"""
    values = series.finite().values
    values = values[values > 0.0]
    if values.size < 2:
        raise ValidationException("cannot measure the scatter of a series with fewer than 2 positive values")
    return float(np.std(np.log(values)))


def detect_phase_boundaries(
    series: DistanceSeries,
    window: int = 5,
    min_prominence: Optional[float] = None,
    floor: Optional[float] = None,
) -> Tuple[float, float]:
    """
    tau1 = first local minimum and tau2 = the following local maximum of the
    median-smoothed log series

    Args:
        series: Distance series, typically L_H
        window: Median filter size in samples
        min_prominence: Minimum prominence of both extrema in natural-log units
        floor: Noise floor; the search stops at the first sample at or below it

    Raises:
        MonotoneSeries if either extremum is missing
    """
    usable = series.finite()
    if floor is not None:
        below = np.flatnonzero(usable.values <= floor)
        if below.size:
            usable = usable.until(usable.times[below[0]])
    if len(usable) < 3:
        raise MonotoneSeries("series too short for interior extrema")
    smooth = median_filter(np.log(np.maximum(usable.values, 1e-300)), size=window, mode="nearest")
    minima, _ = find_peaks(-smooth, prominence=min_prominence)
    if minima.size == 0:
        raise MonotoneSeries(f"{series.kind} series has no interior minimum")
    first_min = int(minima[0])
    maxima, _ = find_peaks(smooth, prominence=min_prominence)
    later = maxima[maxima > first_min]
    if later.size == 0:
        raise MonotoneSeries(f"{series.kind} series has no maximum after its first minimum")
    return float(usable.times[first_min]), float(usable.times[int(later[0])])
