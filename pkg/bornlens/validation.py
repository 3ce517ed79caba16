"""
Property suite behind the ``validate`` verb.

Every check is fast (seconds) and compares an implementation against an
independent oracle: scipy special functions, quadrature, closed forms or a
second code path.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np
from scipy import integrate, special

from .exceptions import BornLensException
from .models import (
    DoubleSlitModel,
    GravityModel,
    OscillatorGaussianModel,
    airy_maclaurin,
    airy_zeros,
    fokker_planck_precision,
    gamma_series,
    gaussian_airy_integral,
    width_closed_form,
)
from .base_model import drift_from_psi
from .registry import ModelRegistry
from .sde import Ensemble, IntegratorConfig, born_ensemble, simulate
from .stats import (
    SampledCurve,
    compare_to_born,
    entropy_h,
    fit_relaxation,
    DistanceSeries,
    lp_distance,
    sliding_rms,
)

logger = logging.getLogger(__name__)

Check = Callable[[], Tuple[bool, str]]

#: (a, b) points of the Gaussian-Airy identity check
IDENTITY_GRID: List[Tuple[float, float]] = [
    (a, b) for a in (0.1, 0.3, 0.5, 1.0) for b in (-2.0, -1.0, 0.0, 1.5, 2.0, 3.0)
]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def check_airy_zeros() -> Tuple[bool, str]:
    ours = airy_zeros(100)
    reference = -special.ai_zeros(100)[0]
    err = float(np.max(np.abs(ours - reference)))
    return err < 1e-10, f"max |E_n - scipy| = {err:.2e}"


def check_airy_series() -> Tuple[bool, str]:
    x = np.linspace(-5.0, 5.0, 41)
    ai, aip = airy_maclaurin(x)
    ref_ai, ref_aip, _, _ = special.airy(x)
    err = float(max(np.max(np.abs(ai - ref_ai)), np.max(np.abs(aip - ref_aip))))
    return err < 1e-10, f"max series error on [-5, 5] = {err:.2e}"


def check_gaussian_airy_identity() -> Tuple[bool, str]:
    worst = 0.0
    for a, b in IDENTITY_GRID:
        quad, _ = integrate.quad(
            lambda u, a=a, b=b: math.exp(-u * u) * special.airy(2.0 * a * u + b)[0], -np.inf, np.inf,
            epsabs=1e-13, epsrel=1e-12, limit=400,
        )
        worst = max(worst, abs(quad - gaussian_airy_integral(a, b)))
    return worst < 1e-8, f"max |quad - closed form| = {worst:.2e}"


def check_model_examples() -> Tuple[bool, str]:
    """Every registered model: unit norm and drift equal to (hbar/m)(Re+Im)(psi'/psi)"""
    details = []
    passed = True
    for name in ModelRegistry.list_models():
        model = ModelRegistry.get(name).example()
        lo, hi = model.support(0.3)
        grid = np.linspace(lo, hi, 20001)
        density = model.density(grid, 0.3)
        norm = float(integrate.trapezoid(density, grid))
        bulk = np.flatnonzero(density >= 0.05 * density.max())
        probe = grid[bulk[np.linspace(0, bulk.size - 1, 7).astype(int)]]
        direct = drift_from_psi(model.psi(probe, 0.3), model.dpsi_dx(probe, 0.3), model.hbar_over_m)
        drift_err = float(np.max(np.abs(model.drift(probe, 0.3) - direct) / (1.0 + np.abs(direct))))
        ok = abs(norm - 1.0) < 1e-3 and drift_err < 1e-5
        passed &= ok
        details.append(f"{name}: norm={norm:.6f} drift_err={drift_err:.1e}")
    return passed, "; ".join(details)


def check_double_slit_density() -> Tuple[bool, str]:
    model = DoubleSlitModel(0.3)
    x = np.linspace(-4.0, 4.0, 801)
    err = max(float(np.max(np.abs(model.density(x, t) - np.abs(model.psi(x, t)) ** 2))) for t in (0.0, 0.1, 0.7))
    return err < 1e-12, f"max |closed form - |psi|^2| = {err:.2e}"


def check_riccati_oracle() -> Tuple[bool, str]:
    """gamma from the quadrature against C/B from the Fokker-Planck ODE"""
    times = np.linspace(0.05, 5.0, 400)
    worst = 0.0
    for b0 in (0.125, 0.5, 2.0, 8.0):
        gamma, _ = gamma_series(lambda t, b0=b0: float(width_closed_form(b0, t)), times)
        precision, width = fokker_planck_precision(0.0, b0, times)
        worst = max(worst, float(np.max(np.abs(gamma - precision / width) / gamma)))
    return worst < 1e-6, f"max relative error = {worst:.2e}"


def check_distances() -> Tuple[bool, str]:
    x = np.linspace(-12.0, 13.0, 25001)
    f = SampledCurve(x, np.exp(-0.5 * x ** 2) / math.sqrt(2 * math.pi))
    g = SampledCurve(x, np.exp(-0.5 * (x - 1.0) ** 2) / math.sqrt(2 * math.pi))
    l1 = lp_distance(f, g, 1)
    s1, s2 = 1.0, 1.5
    h_ref = math.log(s2 / s1) + s1 ** 2 / (2 * s2 ** 2) - 0.5
    wide = SampledCurve(x, np.exp(-0.5 * (x / s2) ** 2) / (s2 * math.sqrt(2 * math.pi)))
    h = entropy_h(f, wide)
    ok = abs(l1 - 2.0 * math.erf(1.0 / (2.0 * math.sqrt(2.0)))) < 1e-6 and abs(h - h_ref) < 1e-6
    return ok, f"L1={l1:.6f}, H={h:.6f} (closed form {h_ref:.6f})"


def check_sliding_rms() -> Tuple[bool, str]:
    theta = sliding_rms(0.25 * np.arange(40.0), 10)
    err = float(np.max(np.abs(theta[5:-5] ** 2 - 10 * 0.25 ** 2)))
    return err < 1e-12, f"interior Theta^2 error = {err:.1e}"


def check_fit_round_trip() -> Tuple[bool, str]:
    t = np.linspace(0.0, 1.0, 60)
    values = 0.5 * np.exp(-0.8 * np.exp(3.0 * t))
    fit = fit_relaxation(DistanceSeries("L1", t, values))
    err = abs(fit.tau_q - 1.0 / 2.4)
    return err < 1e-6, f"tau_q = {fit.tau_q:.8f} (expected {1 / 2.4:.8f})"


def check_thread_independence() -> Tuple[bool, str]:
    model = OscillatorGaussianModel(0.5)
    ensemble = Ensemble.delta(3000, 0.2, master_seed=7)
    config = IntegratorConfig.for_model(model, 1e-3)
    runs = [
        simulate(ensemble, model.drift, 0.05, 0.01, config, observer=lambda s: None, threads=k, stream_block=256)
        for k in (1, 3)
    ]
    same = np.array_equal(runs[0].ensemble.positions, runs[1].ensemble.positions)
    return same, "1 and 3 threads " + ("agree bit for bit" if same else "differ")


def equilibrium_ratio(model, t_end: float, dt: float, n: int = 20000, seed: int = 11, **integrator_kwargs) -> float:
    """Largest L1 distance of a Born-sampled run over its initial sampling level"""
    ensemble = born_ensemble(model, n, master_seed=seed)
    config = IntegratorConfig.for_model(model, dt, **integrator_kwargs)

    def l1(snap):
        p, born = compare_to_born(snap.positions, model, snap.t, bins=100)
        return lp_distance(p, born, 1)

    values = np.array(simulate(ensemble, model.drift, t_end, t_end / 25.0, config, observer=l1).values())
    return float(values.max() / values[0])


def check_equilibrium_preserved() -> Tuple[bool, str]:
    """Born-sampled ensembles keep their distance near the initial sampling level"""
    runs = [
        ("oscillator", OscillatorGaussianModel(0.5), 0.25, 1e-3, {}),
        ("double-slit", DoubleSlitModel(0.3), 0.25, 1e-3, {}),
        ("gravity", GravityModel.example(), 0.1, 1e-4, {"boundary": "reflect-at-zero"}),
    ]
    ratios = {name: equilibrium_ratio(model, t_end, dt, **kwargs) for name, model, t_end, dt, kwargs in runs}
    detail = ", ".join(f"{name} {ratio:.3f}" for name, ratio in ratios.items())
    return all(r < 2.0 for r in ratios.values()), f"max L1 / initial L1: {detail}"


CHECKS: List[Tuple[str, Check]] = [
    ("airy zeros", check_airy_zeros),
    ("airy series", check_airy_series),
    ("gaussian-airy integral", check_gaussian_airy_identity),
    ("model norms and drifts", check_model_examples),
    ("double-slit density", check_double_slit_density),
    ("riccati oracle", check_riccati_oracle),
    ("distances", check_distances),
    ("sliding rms", check_sliding_rms),
    ("relaxation fit", check_fit_round_trip),
    ("thread independence", check_thread_independence),
    ("equilibrium preserved", check_equilibrium_preserved),
]


def run_validation_suite(checks: List[Tuple[str, Check]] = None) -> List[CheckResult]:
    """
    Run the property checks; a check that raises counts as failed

    Returns:
        One CheckResult per check, in suite order
    """
    results = []
    for name, check in checks or CHECKS:
        try:
            passed, detail = check()
        except (BornLensException, ArithmeticError, ValueError) as e:
            passed, detail = False, f"{type(e).__name__}: {e}"
        logger.info("validate %-24s %s  %s", name, "pass" if passed else "FAIL", detail)
        results.append(CheckResult(name, bool(passed), detail))
    return results
