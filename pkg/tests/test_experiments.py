"""
Tests for the five studies at small ensemble sizes
"""

import math

import numpy as np
import pytest

from bornlens.config import BarrierSpec, BornLensConfig, DoubleSlitSpec, GravitySpec, OscillatorSpec, SuperpositionSpec
from bornlens.exceptions import ValidationException
from bornlens.experiments import BarrierStudy, DoubleSlitStudy, GravityStudy, OscillatorStudy, SuperpositionStudy
from bornlens.experiments.barrier import far_side_fractions, start_blocks
from bornlens.experiments.common import DistanceObserver, run_distances
from bornlens.experiments.double_slit import interference_time, relaxation_prefix
from bornlens.experiments.gravity import interference_times
from bornlens.experiments.oscillator import relaxation_times
from bornlens.models import DoubleSlitModel, OscillatorGaussianModel, gravity_coeffs
from bornlens.sde import Ensemble
from bornlens.stats import DISTANCE_KINDS, DistanceSeries, SampledCurve, detect_peaks_prominence

CONFIG = BornLensConfig(threads=2, stream_block=256)


class TestCommon:
    """Tests for the shared observer and runner"""

    def test_observer_survives_sparse_ensembles(self):
        """A histogram failure yields NaN distances and is counted"""
        observer = DistanceObserver(OscillatorGaussianModel(0.5), bins=50)
        values = observer(Ensemble(np.linspace(-1.0, 1.0, 20)))
        assert all(math.isnan(values[k]) for k in DISTANCE_KINDS)
        assert observer.failures == 1

    def test_run_distances(self):
        """One series per distance kind on the observation grid"""
        model = OscillatorGaussianModel(0.5)
        spec = SuperpositionSpec(n=2000, dt=1e-3, observe_every=0.01, bins=40)
        series, observer, result = run_distances(
            model, Ensemble.delta(2000, 0.0, master_seed=1), spec, CONFIG, 0.05, snapshot_times=[0.03]
        )
        assert set(series) == set(DISTANCE_KINDS)
        assert len(series["L1"]) == 6
        assert 0.03 in observer.snapshots


class TestDoubleSlit:
    """Tests for the double-slit study"""

    def test_interference_time(self):
        """A fringe appears within the scan horizon"""
        tau = interference_time(DoubleSlitModel(0.3), 0.005, 3.0, 1e-3)
        assert 0.0 < tau < 3.0

    def test_central_fringe_onset(self):
        """The central maximum forms once a^2 (sigma^4 - t^2) < sigma^2 (sigma^4 + t^2)"""
        narrow = interference_time(DoubleSlitModel(0.2), 0.005, 3.0, 1e-3)
        wide = interference_time(DoubleSlitModel(0.6), 0.005, 3.0, 1e-3)
        assert narrow < wide
        assert wide == pytest.approx(0.25, abs=0.02)

    def test_narrow_slit_interference_time(self):
        """For sigma = 0.09 the centre reaches 1e-3 of the peak once 4 exp(-sigma^2 / (sigma^4 + t^2)) = 1e-3"""
        tau = interference_time(DoubleSlitModel(0.09), 0.001, 0.2, 1e-3)
        assert tau == pytest.approx(0.031, abs=0.003)

    def test_relaxation_prefix(self):
        """The fitted part stops at the first value within 2x the floor"""
        series = DistanceSeries("L1", np.arange(6.0), [1.0, 0.5, 0.2, 0.05, 0.3, 0.01])
        prefix = relaxation_prefix(series, 0.05)
        assert list(prefix.times) == [0.0, 1.0, 2.0, 3.0]

    def test_run(self):
        """A small run fills records, series and plots"""
        spec = DoubleSlitSpec(
            sigma=[0.3], n=2000, dt=1e-3, t_end=0.05, observe_every=2e-3, bins=40,
            interference_horizon=1.0, snapshot_times=[0.02], control=False, fanout=3,
        )
        report = DoubleSlitStudy(config=CONFIG).run(spec)
        assert report.scenario == "double-slit"
        (point,) = report.points
        assert point["sigma"] == 0.3
        assert set(point["tau_q"]) == set(DISTANCE_KINDS)
        assert "sigma=0.3/series_L1" in report.series
        assert "sigma=0.3/distances" in report.plots
        assert "sigma=0.3/snapshot_t=0.02" in report.plots
        assert report.tables["sigma=0.3/trajectories.csv"].startswith("trajectory_id,t,x\n")
        assert "error" in report.summary["tanh_fits"]["tau_int"]


class TestOscillator:
    """Tests for the oscillator study"""

    def test_ground_state_relaxation_time(self):
        """For B0 = 2, Theta drops below 1e-3 near t = 0.64"""
        spec = OscillatorSpec(b0=[2.0], theta=[1e-3], t_end=2.0, gamma_step=1e-3, monte_carlo_b0=None)
        pipeline = relaxation_times(OscillatorGaussianModel(2.0), spec)
        assert 0.5 < pipeline["tau_q"][1e-3] < 0.8
        assert pipeline["gamma"].shape == pipeline["theta"].shape

    def test_relaxation_time_saturates(self):
        """tau_q grows with sigma0 and levels off just past a quarter period"""
        spec = OscillatorSpec(theta=[5e-4], t_end=2.0, gamma_step=1e-4, monte_carlo_b0=None)
        taus = []
        for b0 in (32.0, 8.0, 2.0, 0.5, 0.125):
            pipeline = relaxation_times(OscillatorGaussianModel(b0, t_max=3.0), spec)
            taus.append(pipeline["tau_q"][5e-4])
        assert all(isinstance(t, float) for t in taus)
        assert taus == sorted(taus)
        assert 0.95 * math.pi / 4.0 <= taus[-1] <= math.pi / 4.0 + 0.02

    def test_unsettled_gamma_never_converges(self):
        """A horizon that ends while gamma still falls steeply gives no relaxation time"""
        spec = OscillatorSpec(theta=[5e-4], t_end=0.3, gamma_step=1e-4, monte_carlo_b0=None)
        pipeline = relaxation_times(OscillatorGaussianModel(0.125), spec)
        assert pipeline["tau_q"][5e-4].startswith("NeverConverged")
        assert pipeline["theta"][-1] == 0.0

    def test_run(self):
        """Points per (b0, theta), decimated series and the Monte Carlo check"""
        spec = OscillatorSpec(
            b0=[2.0, 0.5], theta=[1e-3], t_end=2.0, gamma_step=1e-3, series_every=1e-2,
            n=2000, dt=1e-3, observe_every=1e-2, mc_t_end=0.2, checkpoints=2,
        )
        report = OscillatorStudy(config=CONFIG).run(spec)
        assert [p["b0"] for p in report.points] == [0.5, 2.0]
        assert report.points[1]["sigma0"] == pytest.approx(1.0)
        times, gamma = report.series["b0=2/series_gamma"]
        assert len(times) == len(gamma) == 200
        assert len(report.summary["monte_carlo"]["checkpoints"]) == 2
        assert "monte_carlo_b0=0.5/series_precision" in report.series


class TestBarrier:
    """Tests for the node-crossing study"""

    def test_start_blocks(self):
        """Each start gets an equal block of ids"""
        positions, blocks = start_blocks(10, [1.0, -1.0])
        assert list(positions) == [1.0] * 5 + [-1.0] * 5
        assert blocks == [slice(0, 5), slice(5, 10)]

    def test_far_side_fractions(self):
        """Fractions count particles past x = 0"""
        positions = np.array([1.0, -0.5, 2.0, 3.0, -1.0, 0.5, -2.0, -3.0])
        blocks = [slice(0, 4), slice(4, 8)]
        assert far_side_fractions(positions, [1.0, -1.0], blocks) == (0.25, 0.25)

    def test_start_on_node(self):
        """A start on the node is rejected"""
        spec = BarrierSpec(starts=[0.0], dt=[0.01], t_end=0.1, observe_every=0.05)
        with pytest.raises(ValidationException):
            BarrierStudy(config=CONFIG).run(spec)

    def test_run(self):
        """Per-start fractions, crossing counts and the control run"""
        spec = BarrierSpec(
            dt=[0.01, 0.005], n=1000, t_end=0.5, observe_every=0.1,
            control_dt=1e-3, control_t_end=0.1,
        )
        report = BarrierStudy(config=CONFIG).run(spec)
        assert [(p["dt"], p["start"]) for p in report.points] == [(0.01, 1.0), (0.01, -1.0), (0.005, 1.0), (0.005, -1.0)]
        assert all(0.0 <= p["far_side_fraction"] <= 1.0 for p in report.points)
        assert set(report.summary["node_crossings"]) == {"0.01", "0.005"}
        assert set(report.summary["decreasing_with_dt"]) == {"1", "-1"}
        control = report.summary["control"]
        assert "stayed_on_side" in control or "error" in control


class TestSuperposition:
    """Tests for the superposition study"""

    def test_run(self):
        """L_H series, control floor and tau_q per mixing angle"""
        spec = SuperpositionSpec(
            mix_angle_deg=[30.0], n=1000, dt=1e-3, t_end=0.2, observe_every=0.02, bins=30, control_t_end=0.1,
        )
        report = SuperpositionStudy(config=CONFIG).run(spec)
        (point,) = report.points
        assert point["mix_angle_deg"] == 30.0
        assert "tau_q" in point
        assert "mix_angle_deg=30/series_H" in report.series
        assert "mix_angle_deg=30/control_H" in report.series
        if point["tau_q"] is not None:
            assert point["tau_q_over_period"] == pytest.approx(point["tau_q"] / math.pi)


class TestGravity:
    """Tests for the gravity study"""

    def test_interference_times(self):
        """Every prominence gets a time or an error text"""
        model = gravity_coeffs(2.5, 0.09, n_max=50, min_norm=0.5)
        found = interference_times(model, 1e-3, 0.05, [0.0025, 0.05])
        assert set(found) == {0.0025, 0.05}
        assert all(isinstance(v, (float, str)) for v in found.values())

    def test_truncation_ripples_are_not_interference(self):
        """Peaks of the truncated initial density do not set tau_int at the first step"""
        model = gravity_coeffs(1.5, 0.09, n_max=50, min_norm=0.5)
        assert detect_peaks_prominence(SampledCurve(*model.tabulated_density(0.0)), 0.0152)
        found = interference_times(model, 1e-3, 0.02, [0.0025, 0.0152])
        for tau in found.values():
            assert isinstance(tau, str) or tau > 1e-3 + 1e-12

    def test_ratio_band(self):
        """The error band spans the reference and band prominences only"""
        spec = GravitySpec(p=[0.0025, 0.0152, 0.05, 0.152])
        record = {"tau1": 0.1, "tau_int": {0.0025: 0.09, 0.0152: 0.11, 0.05: 0.1, 0.152: 0.3}}
        GravityStudy._ratios(spec, record)
        assert record["ratio"] == pytest.approx(1.0)
        assert record["ratio_min"] == pytest.approx(0.9)
        assert record["ratio_max"] == pytest.approx(1.1)
        assert set(record["tau_int"]) == {"0.0025", "0.0152", "0.05", "0.152"}

    def test_ratio_needs_reference(self):
        """Without tau_int at the reference prominence there is no ratio"""
        record = {"tau1": 0.1, "tau_int": {0.0025: 0.09, 0.05: "NoInterference: none"}}
        GravityStudy._ratios(GravitySpec(), record)
        assert record["ratio"] is None

    def test_run(self):
        """Expansion data, L_H phases and unit conversions per altitude"""
        spec = GravitySpec(
            h=[2.5], n=1000, dt=1e-4, t_end=0.05, observe_every=5e-3, bins=40,
            snapshot_times=[0.01], control_t_end=0.02, dump_trajectory=True,
        )
        report = GravityStudy(config=CONFIG).run(spec)
        (point,) = report.points
        assert point["n_max"] == 50
        assert 0.5 <= point["raw_norm"] <= 1.0
        assert point["h_um"] == pytest.approx(2.5 * report.summary["units"]["x0_um"])
        assert set(point["tau_int"]) == {"0.0025", "0.0152", "0.05", "0.152"}
        assert point["reflections"] >= 0
        assert "h=2.5/series_H" in report.series
        assert report.tables["h=2.5/trajectory.csv"].startswith("trajectory_id,t,x\n")
        assert "ratios_near_unity" in report.summary


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
