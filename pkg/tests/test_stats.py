"""
Tests for densities, distances, fits and detectors
"""

import math

import numpy as np
import pytest

from bornlens.exceptions import (
    FitDiverged,
    GridMismatch,
    MonotoneSeries,
    NeverConverged,
    NoInterference,
    SupportMismatch,
    TooFewSamples,
    ValidationException,
)
from bornlens.models import OscillatorGaussianModel
from bornlens.sde import born_ensemble
from bornlens.stats import (
    DistanceSeries,
    SampledCurve,
    compare_to_born,
    detect_interference_double_slit,
    detect_peaks_prominence,
    detect_phase_boundaries,
    distances,
    entropy_h,
    estimate_density,
    fit_relaxation,
    fit_tanh,
    floor_crossing_time,
    interference_time_prominence,
    linf_distance,
    log_scatter,
    lp_distance,
    noise_floor,
    sliding_rms,
    tanh_curve,
    threshold_time,
)


def gaussian(x, mu=0.0, s=1.0):
    return np.exp(-0.5 * ((x - mu) / s) ** 2) / (s * math.sqrt(2.0 * math.pi))


class TestDensity:
    """Tests for estimate_density and SampledCurve"""

    def test_normalized_histogram(self):
        """Bin values integrate to one over the counted samples"""
        rng = np.random.default_rng(0)
        edges = np.linspace(-4.0, 4.0, 41)
        estimate = estimate_density(rng.normal(size=10_000), edges)
        assert np.sum(estimate.values * np.diff(edges)) == pytest.approx(1.0)

    def test_too_few_samples(self):
        """Fewer than 100 samples on the grid is rejected"""
        with pytest.raises(TooFewSamples):
            estimate_density(np.zeros(50), np.linspace(-1.0, 1.0, 11))

    def test_too_sparse(self):
        """A mean count per occupied bin below 10 is rejected"""
        with pytest.raises(TooFewSamples):
            estimate_density(np.linspace(-1.0, 1.0, 200), np.linspace(-1.0, 1.0, 101))

    def test_zero_outside_grid(self):
        """Interpolated density vanishes outside the bins"""
        rng = np.random.default_rng(1)
        estimate = estimate_density(rng.normal(size=5000), np.linspace(-3.0, 3.0, 31))
        assert np.all(estimate.evaluate(np.array([-5.0, 4.0])) == 0.0)
        assert np.all(estimate.evaluate(np.linspace(-3.0, 3.0, 101)) >= 0.0)

    def test_unknown_interpolation(self):
        """Only linear and monotone-cubic are known"""
        with pytest.raises(ValidationException):
            estimate_density(np.zeros(500), np.linspace(-1.0, 1.0, 5), interpolation="spline")

    def test_curve_grid_must_increase(self):
        """A SampledCurve needs a strictly increasing grid"""
        with pytest.raises(ValidationException):
            SampledCurve(np.array([0.0, 0.0, 1.0]), np.zeros(3))


class TestDistances:
    """Tests for the distance functionals"""

    x = np.linspace(-12.0, 13.0, 25001)

    def test_l1_of_shifted_gaussians(self):
        """L1 between N(0,1) and N(1,1) is 2 erf(1 / (2 sqrt 2))"""
        f = SampledCurve(self.x, gaussian(self.x))
        g = SampledCurve(self.x, gaussian(self.x, 1.0))
        assert lp_distance(f, g, 1) == pytest.approx(2.0 * math.erf(1.0 / (2.0 * math.sqrt(2.0))), abs=1e-6)

    def test_entropy_of_gaussians(self):
        """H between Gaussians of widths 1 and 1.5 matches the closed form"""
        f = SampledCurve(self.x, gaussian(self.x))
        g = SampledCurve(self.x, gaussian(self.x, s=1.5))
        expected = math.log(1.5) + 1.0 / (2.0 * 1.5 ** 2) - 0.5
        assert entropy_h(f, g) == pytest.approx(expected, abs=1e-6)

    def test_identical_curves(self):
        """All distances vanish for identical curves"""
        f = SampledCurve(self.x, gaussian(self.x))
        assert all(v == pytest.approx(0.0, abs=1e-15) for v in distances(f, f).values())

    def test_linf(self):
        """Linf is the largest pointwise gap"""
        f = SampledCurve(np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0, 0.0]))
        g = SampledCurve(np.array([0.0, 1.0, 2.0]), np.array([0.0, 0.25, 0.5]))
        assert linf_distance(f, g) == pytest.approx(0.75)

    def test_grid_mismatch(self):
        """Curves on different grids are rejected"""
        f = SampledCurve(np.linspace(0.0, 1.0, 5), np.ones(5))
        g = SampledCurve(np.linspace(0.0, 1.0, 6), np.ones(6))
        with pytest.raises(GridMismatch):
            lp_distance(f, g, 2)

    def test_invalid_p(self):
        """Only p = 1 and p = 2 are supported"""
        f = SampledCurve(np.linspace(0.0, 1.0, 5), np.ones(5))
        with pytest.raises(ValidationException):
            lp_distance(f, f, 3)

    def test_support_mismatch(self):
        """f with mass where g vanishes is rejected unless g is clipped"""
        grid = np.linspace(0.0, 1.0, 5)
        f = SampledCurve(grid, np.array([0.0, 1.0, 1.0, 1.0, 0.0]))
        g = SampledCurve(grid, np.array([0.0, 0.0, 2.0, 1.0, 0.0]))
        with pytest.raises(SupportMismatch):
            entropy_h(f, g)
        assert math.isfinite(entropy_h(f, g, clip_reference=True))

    def test_compare_to_born_in_equilibrium(self):
        """A Born-sampled ensemble sits close to |psi|^2"""
        model = OscillatorGaussianModel(0.5)
        ensemble = born_ensemble(model, 20_000, master_seed=4)
        empirical, born = compare_to_born(ensemble.positions, model, 0.0, bins=100)
        assert np.array_equal(empirical.x, born.x)
        assert empirical.integral() == pytest.approx(1.0)
        assert lp_distance(empirical, born, 1) < 0.1


class TestFits:
    """Tests for the relaxation and tanh fits"""

    def test_relaxation_round_trip(self):
        """Noise-free data give back tau_q = 1/(a2 a3)"""
        t = np.linspace(0.0, 1.0, 60)
        fit = fit_relaxation(DistanceSeries("L1", t, 0.5 * np.exp(-0.8 * np.exp(3.0 * t))))
        assert fit.tau_q == pytest.approx(1.0 / 2.4, rel=1e-6)
        assert fit.params["alpha1"] == pytest.approx(0.5, rel=1e-6)
        assert fit.converged

    def test_relaxation_needs_points(self):
        """Fewer than 20 positive points is rejected"""
        t = np.linspace(0.0, 1.0, 10)
        with pytest.raises(ValidationException):
            fit_relaxation(DistanceSeries("L1", t, np.exp(-t)))

    def test_relaxation_needs_decay(self):
        """A series without a decade of decay cannot be fitted"""
        t = np.linspace(0.0, 1.0, 40)
        with pytest.raises(FitDiverged):
            fit_relaxation(DistanceSeries("L2", t, 1.0 + 0.1 * np.sin(t)))

    def test_tanh_reproduces_data(self):
        """A noise-free tanh profile is fitted exactly"""
        sigmas = np.linspace(0.2, 0.7, 8)
        truth = {"beta1": 0.2, "beta2": 8.0, "beta3": -2.0, "beta4": 0.3}
        taus = tanh_curve(truth, sigmas)
        fit = fit_tanh(sigmas, taus)
        assert fit.params["beta2"] > 0.0
        assert np.allclose(tanh_curve(fit.params, sigmas), taus, atol=1e-6)

    def test_tanh_needs_points(self):
        """Fewer than 6 points is rejected"""
        with pytest.raises(ValidationException):
            fit_tanh([0.2, 0.3, 0.4], [0.1, 0.2, 0.3])


class TestWindowStatistics:
    """Tests for sliding_rms and threshold_time"""

    def test_constant_series(self):
        """A constant series has zero spread"""
        assert np.all(sliding_rms(np.full(30, 2.5), 10) == 0.0)

    def test_linear_series(self):
        """Interior windows of an arithmetic series have Theta^2 = 10 s^2"""
        theta = sliding_rms(0.25 * np.arange(40.0), 10)
        assert np.allclose(theta[5:-5] ** 2, 10 * 0.25 ** 2)
        assert theta[0] == 0.0

    @pytest.mark.parametrize("window", [3, 0])
    def test_window_must_be_even(self, window):
        """The window parameter is even and at least 2"""
        with pytest.raises(ValidationException):
            sliding_rms(np.arange(20.0), window)

    def test_threshold_interpolates(self):
        """The crossing is interpolated after the last sample above"""
        times = np.arange(6.0)
        assert threshold_time(times, [5.0, 4.0, 3.0, 0.5, 0.4, 0.3], 1.0) == pytest.approx(2.8)

    def test_threshold_stays_below(self):
        """A dip followed by a rise does not count"""
        times = np.arange(5.0)
        assert threshold_time(times, [3.0, 0.5, 2.0, 0.5, 0.4], 1.0) == pytest.approx(2.0 + 2.0 / 3.0)

    def test_threshold_never_reached(self):
        """A series ending above the threshold never converges"""
        with pytest.raises(NeverConverged):
            threshold_time(np.arange(3.0), [3.0, 2.0, 1.5], 1.0)

    def test_truncated_tail_is_ignored(self):
        """A steadily growing series never converges once the shrinking end windows are dropped"""
        times = 1e-3 * np.arange(1, 201)
        theta = sliding_rms(5.0 * times, 10)
        assert theta[-1] == 0.0
        with pytest.raises(NeverConverged):
            threshold_time(times, theta, 1e-3, ignore_tail=5)

    def test_ignore_tail_keeps_real_crossings(self):
        """Dropping the tail leaves an earlier crossing unchanged"""
        times = np.arange(8.0)
        values = [5.0, 4.0, 3.0, 0.5, 0.4, 0.3, 2.0, 0.0]
        assert threshold_time(times, values, 1.0, ignore_tail=2) == pytest.approx(2.8)
        with pytest.raises(ValidationException):
            threshold_time(times, values, 1.0, ignore_tail=7)

    def test_noise_floor_and_crossing(self):
        """The floor is the median; the crossing uses factor x floor"""
        control = DistanceSeries("H", np.arange(5.0), [0.1, 0.2, 0.3, np.nan, 0.2])
        floor = noise_floor(control)
        assert floor == pytest.approx(0.2)
        series = DistanceSeries("H", np.arange(4.0), [2.0, 1.0, 0.3, 0.2])
        assert floor_crossing_time(series, floor, 2.0) == pytest.approx(1.0 + 0.6 / 0.7)


class TestDetectors:
    """Tests for the interference and phase detectors"""

    x = np.linspace(-4.0, 4.0, 801)

    def test_double_slit_interior_maximum(self):
        """Three significant maxima mark interference"""
        two = SampledCurve(self.x, gaussian(self.x, -1.0, 0.3) + gaussian(self.x, 1.0, 0.3))
        three = SampledCurve(self.x, two.y + 0.5 * gaussian(self.x, 0.0, 0.3))
        assert detect_interference_double_slit([(0.0, two), (0.01, three)]) == pytest.approx(0.01)

    def test_double_slit_no_interference(self):
        """Two peaks only raise NoInterference"""
        two = SampledCurve(self.x, gaussian(self.x, -1.0, 0.3) + gaussian(self.x, 1.0, 0.3))
        with pytest.raises(NoInterference):
            detect_interference_double_slit([(0.0, two), (0.01, two)])

    def test_double_slit_coverage_and_resolution(self):
        """The scan must cover [-3, 3] with a step of at most 0.01"""
        narrow = SampledCurve(np.linspace(-2.0, 2.0, 11), np.ones(11))
        with pytest.raises(ValidationException):
            detect_interference_double_slit([(0.0, narrow)])
        wide = SampledCurve(self.x, gaussian(self.x))
        with pytest.raises(ValidationException):
            detect_interference_double_slit([(0.0, wide), (0.05, wide)])

    def test_prominent_peaks(self):
        """Side peaks inside the band count when prominent enough"""
        y = gaussian(self.x, 0.0, 0.2) + 0.3 * gaussian(self.x, 2.0, 0.2) + 0.2 * gaussian(self.x, -2.0, 0.2)
        curve = SampledCurve(self.x, y)
        assert len(detect_peaks_prominence(curve, 0.1)) == 2
        assert len(detect_peaks_prominence(curve, 0.25)) == 1
        flat = SampledCurve(self.x, gaussian(self.x))
        assert interference_time_prominence([(0.1, flat), (0.2, curve)], 0.1) == pytest.approx(0.2)

    def test_phase_boundaries(self):
        """tau1 is the first minimum and tau2 the following maximum"""
        t = np.arange(100.0)
        log_v = np.where(t <= 30, -0.1 * t, np.where(t <= 50, -3.0 + 0.05 * (t - 30), -2.0 - 0.1 * (t - 50)))
        tau1, tau2 = detect_phase_boundaries(DistanceSeries("H", t, np.exp(log_v)))
        assert tau1 == pytest.approx(30.0, abs=2.0)
        assert tau2 == pytest.approx(50.0, abs=2.0)

    def test_monotone_series(self):
        """A monotone series has no phase boundaries"""
        t = np.arange(50.0)
        with pytest.raises(MonotoneSeries):
            detect_phase_boundaries(DistanceSeries("H", t, np.exp(-0.1 * t)))

    @staticmethod
    def noisy_three_phase(seed=7):
        """Fall to 0.1 at t = 0.1, rise to 0.3 at t = 0.2, relax onto a 0.01 floor by t = 0.5"""
        t = 0.005 * np.arange(201)
        log_v = np.interp(t, [0.0, 0.1, 0.2, 0.5, 1.0], np.log([1.0, 0.1, 0.3, 0.01, 0.01]))
        noise = np.random.default_rng(seed).normal(0.0, 0.05, t.size)
        return DistanceSeries("H", t, np.exp(log_v + noise))

    @pytest.mark.parametrize("seed", [7, 11, 23])
    def test_phase_boundaries_ignore_noise(self, seed):
        """With a prominence guard and the floor cut, sampling noise does not move tau1 or tau2"""
        series = self.noisy_three_phase(seed)
        tau1, tau2 = detect_phase_boundaries(series, window=5, min_prominence=0.3, floor=0.02)
        assert tau1 == pytest.approx(0.1, abs=0.025)
        assert tau2 == pytest.approx(0.2, abs=0.025)

    def test_noise_alone_is_monotone(self):
        """Noisy decay without a real rise yields no phase boundaries"""
        t = 0.005 * np.arange(201)
        log_v = np.interp(t, [0.0, 0.5, 1.0], np.log([1.0, 0.01, 0.01]))
        noise = np.random.default_rng(3).normal(0.0, 0.05, t.size)
        series = DistanceSeries("H", t, np.exp(log_v + noise))
        with pytest.raises(MonotoneSeries):
            detect_phase_boundaries(series, window=5, min_prominence=0.3, floor=0.02)

    def test_log_scatter(self):
        """The scatter is the standard deviation of the log values"""
        control = DistanceSeries("H", np.arange(4.0), np.exp([0.0, 1.0, 0.0, 1.0]))
        assert log_scatter(control) == pytest.approx(0.5)

    def test_initial_ripples_do_not_count(self):
        """Peaks already present at the start are followed and never mark interference"""
        ripples = gaussian(self.x, 0.0, 0.3) + 0.1 * gaussian(self.x, 1.5, 0.1) + 0.1 * gaussian(self.x, -1.5, 0.1)
        start = SampledCurve(self.x, ripples)
        baseline = detect_peaks_prominence(start, 0.01)
        assert len(baseline) == 2
        shifted = gaussian(self.x, 0.0, 0.3) + 0.1 * gaussian(self.x, 1.52, 0.1) + 0.1 * gaussian(self.x, -1.52, 0.1)
        fringes = shifted + 0.1 * gaussian(self.x, 3.0, 0.1) + 0.1 * gaussian(self.x, -3.0, 0.1)
        curves = [(0.001, start), (0.002, SampledCurve(self.x, shifted)), (0.003, SampledCurve(self.x, fringes))]
        assert interference_time_prominence(curves, 0.01) == pytest.approx(0.001)
        assert interference_time_prominence(curves, 0.01, baseline=baseline, tolerance=0.05) == pytest.approx(0.003)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
