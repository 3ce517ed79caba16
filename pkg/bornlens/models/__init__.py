"""
Wavefunction models: double slit, harmonic oscillator, quantum bouncer
"""

from .special import airy_ai, airy_ai_prime, airy_zeros, airy_maclaurin, gaussian_airy_integral
from .double_slit import DoubleSlitModel
from .oscillator import (
    OscillatorGaussianState,
    OscillatorGaussianModel,
    OscillatorEigenModel,
    oscillator_evolve,
    oscillator_series,
    oscillator_drift,
    width_closed_form,
    integrated_width,
    fokker_planck_precision,
    gamma_series,
    riccati_gamma,
)
from .gravity import GravityModel, gravity_coeffs, gravity_psi, neutron_units


def double_slit_density(model: DoubleSlitModel, x, t):
    """Born density of the double-slit state"""
    return model.density(x, t)


def double_slit_drift(model: DoubleSlitModel, x, t):
    """Nelson drift of the double-slit state"""
    return model.drift(x, t)


def eigen_drift(model: OscillatorEigenModel, x, t):
    """Nelson drift of an oscillator eigenstate mixture"""
    return model.drift(x, t)


__all__ = [
    "airy_ai",
    "airy_ai_prime",
    "airy_zeros",
    "airy_maclaurin",
    "gaussian_airy_integral",
    "DoubleSlitModel",
    "double_slit_density",
    "double_slit_drift",
    "OscillatorGaussianState",
    "OscillatorGaussianModel",
    "OscillatorEigenModel",
    "oscillator_evolve",
    "oscillator_series",
    "oscillator_drift",
    "width_closed_form",
    "integrated_width",
    "fokker_planck_precision",
    "gamma_series",
    "riccati_gamma",
    "eigen_drift",
    "GravityModel",
    "gravity_coeffs",
    "gravity_psi",
    "neutron_units",
]
