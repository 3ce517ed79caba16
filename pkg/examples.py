"""
Example usage of BornLens
"""

from bornlens import BornLensConfig, BornLensOrchestrator
from bornlens.config import OscillatorSpec, SuperpositionSpec
from bornlens.experiments.double_slit import interference_time
from bornlens.experiments.oscillator import relaxation_times
from bornlens.models import DoubleSlitModel, OscillatorGaussianModel, gravity_coeffs, neutron_units
from bornlens.sde import Ensemble, IntegratorConfig, simulate
from bornlens.stats import compare_to_born, lp_distance


def example_interference_time():
    """Example: First central fringe behind two Gaussian slits"""
    print("=" * 80)
    print("EXAMPLE 1: Double-slit interference time")
    print("=" * 80)

    for sigma in (0.2, 0.4, 0.6):
        tau = interference_time(DoubleSlitModel(sigma), dt=0.005, horizon=3.0, min_relative_height=1e-3)
        print(f"sigma={sigma:g}  tau_int={tau:.3f}")


def example_oscillator_width():
    """Example: Deterministic relaxation time of the oscillator packet"""
    print("\n" + "=" * 80)
    print("EXAMPLE 2: Oscillator relaxation from the width equation")
    print("=" * 80)

    spec = OscillatorSpec(b0=[2.0], theta=[1e-3], t_end=2.0, gamma_step=1e-3, monte_carlo_b0=None)
    pipeline = relaxation_times(OscillatorGaussianModel(2.0), spec)
    print(f"B0=2  tau_q(theta=1e-3)={pipeline['tau_q'][1e-3]:.3f}")


def example_trajectories():
    """Example: Delta start relaxing toward |psi|^2"""
    print("\n" + "=" * 80)
    print("EXAMPLE 3: Ensemble relaxation in the harmonic well")
    print("=" * 80)

    model = OscillatorGaussianModel(0.5)
    config = IntegratorConfig.for_model(model, dt=1e-3)

    def l1(snapshot):
        p, born = compare_to_born(snapshot.positions, model, snapshot.t, bins=100)
        return lp_distance(p, born, 1)

    result = simulate(Ensemble.delta(20_000, 0.0, master_seed=1), model.drift, 1.0, 0.1, config, observer=l1)
    for t, value in zip(result.times(), result.values()):
        print(f"t={t:.1f}  L1={value:.4f}")


def example_gravity_expansion():
    """Example: Airy eigenstate expansion above the mirror"""
    print("\n" + "=" * 80)
    print("EXAMPLE 4: Gravity eigenbasis")
    print("=" * 80)

    units = neutron_units()
    model = gravity_coeffs(h=2.5, zeta=0.09, n_max=50, min_norm=0.5)
    print(f"h=2.5 ({2.5 * units['x0_um']:.2f} um)  states={model.n_max}  retained norm={model.raw_norm:.3f}")


def example_full_study():
    """Example: A complete study written to disk"""
    print("\n" + "=" * 80)
    print("EXAMPLE 5: Superposition study through the orchestrator")
    print("=" * 80)

    orchestrator = BornLensOrchestrator(BornLensConfig(threads=0))
    spec = SuperpositionSpec(mix_angle_deg=[30.0], n=5000, t_end=1.0, bins=60, master_seed=42)
    result = orchestrator.run("superposition", spec, output_dir="results/examples")
    for point in result.report.points:
        print(point)
    print(f"Manifest: {result.manifest_path}")


def main():
    """Run all examples"""
    print("\n" + "=" * 80)
    print("BornLens: Nelson trajectories and the Born rule")
    print("=" * 80)

    example_interference_time()
    example_oscillator_width()
    example_trajectories()
    example_gravity_expansion()
    example_full_study()

    print("\n" + "=" * 80)
    print("Examples completed successfully!")
    print("=" * 80)


if __name__ == "__main__":
    main()
