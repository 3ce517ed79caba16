"""
Quantum bouncer: a particle above a perfect mirror in uniform gravity.

Dimensionless units: lengths in x0 = (hbar^2 / 2 m^2 g)^(1/3), times in
t0 = hbar / (m g x0), so that i psi_t = (-psi_xx + x) psi for x > 0 with
psi(0) = 0. Then hbar/m = 2 and D_Q = 1.

Eigenstates chi_n(x) = Ai(x - E_n) / Ai'(-E_n) with -E_n the zeros of Ai.
"""

import logging
import math
from functools import lru_cache
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import constants
from scipy.interpolate import CubicHermiteSpline

from ..base_model import ArrayLike, WavefunctionModel
from ..exceptions import NodeSingularity, TruncationTooSevere, ValidationException
from .special import airy_ai, airy_ai_and_prime, airy_ai_prime, airy_zeros, MAX_ZEROS
from ..registry import register_model

logger = logging.getLogger(__name__)

HBAR_OVER_M = 2.0
#: n_max chosen automatically stops at this raw norm
AUTO_NORM_TARGET = 0.9999
AUTO_N_MAX_CAP = 50
#: tabulated drift grid reaches this far beyond the highest turning point
GRID_MARGIN = 12.0


def neutron_units() -> Dict[str, float]:
    """
    Length and time scales of the dimensionless problem for a neutron

    Returns:
        {"x0_m": ..., "t0_s": ..., "x0_um": ..., "t0_ms": ...}
    """
    hbar, m, g = constants.hbar, constants.m_n, constants.g
    x0 = (hbar ** 2 / (2.0 * m ** 2 * g)) ** (1.0 / 3.0)
    t0 = hbar / (m * g * x0)
    return {"x0_m": x0, "t0_s": t0, "x0_um": x0 * 1e6, "t0_ms": t0 * 1e3}


def _raw_coefficients(h: float, zeta: float, energies: np.ndarray) -> np.ndarray:
    # overlap of chi_n with the Gaussian, via the Gaussian-Airy integral
    z2 = zeta * zeta
    prefactor = (8.0 * math.pi * z2) ** 0.25
    shift = h - energies
    return (
        prefactor
        / airy_ai_prime(-energies)
        * airy_ai(shift + z2 * z2)
        * np.exp(z2 * (shift + 2.0 * z2 * z2 / 3.0))
    )


@register_model("gravity")
class GravityModel(WavefunctionModel):
    """Truncated Airy-eigenstate expansion of a Gaussian packet above a mirror"""

    hbar_over_m = HBAR_OVER_M

    def __init__(
        self,
        h: float,
        zeta: float,
        energies: np.ndarray,
        coeffs: np.ndarray,
        raw_norm: float = 1.0,
        grid_step: float = 4e-3,
    ):
        super().__init__(name=f"gravity(h={h:g}, zeta={zeta:g})")
        self.h = float(h)
        self.zeta = float(zeta)
        self.energies = np.asarray(energies, dtype=float)
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.raw_norm = float(raw_norm)
        self.n_max = len(self.energies)
        self._deriv_norm = airy_ai_prime(-self.energies)

        self.grid_max = max(self.h, float(self.energies[-1])) + GRID_MARGIN
        points = int(math.ceil(self.grid_max / grid_step)) + 1
        self.grid = np.linspace(0.0, self.grid_max, points)
        ai, aip = airy_ai_and_prime(self.grid[None, :] - self.energies[:, None])
        self._basis = ai / self._deriv_norm[:, None]
        self._basis_prime = aip / self._deriv_norm[:, None]
        self._basis[:, 0] = 0.0
        self._spline_at = lru_cache(maxsize=4)(self._build_spline)

    @classmethod
    def example(cls) -> "GravityModel":
        return gravity_coeffs(h=5.0, zeta=0.5, n_max=30)

    @property
    def raw_deficit(self) -> float:
        return 1.0 - self.raw_norm

    def eigenaltitudes(self) -> np.ndarray:
        """h_n = E_n in units of x0"""
        return self.energies.copy()

    def _weights(self, t: float) -> np.ndarray:
        return self.coeffs * np.exp(-1j * self.energies * t)

    def _exact(self, x: np.ndarray, t: float, derivative: bool) -> np.ndarray:
        ai, aip = airy_ai_and_prime(np.maximum(x, 0.0)[..., None] - self.energies)
        table = aip if derivative else ai
        value = (table / self._deriv_norm) @ self._weights(t)
        return np.where(x > 0.0, value, 0.0)

    def psi(self, x: ArrayLike, t: float) -> ArrayLike:
        """Sum of c_n chi_n(x) e^(-i E_n t); zero for x <= 0"""
        xs = np.asarray(x, dtype=float)
        value = self._exact(xs, t, derivative=False)
        return complex(value) if np.ndim(value) == 0 else value

    def dpsi_dx(self, x: ArrayLike, t: float) -> ArrayLike:
        xs = np.asarray(x, dtype=float)
        value = self._exact(xs, t, derivative=True)
        return complex(value) if np.ndim(value) == 0 else value

    def tabulated_density(self, t: float) -> Tuple[np.ndarray, np.ndarray]:
        """|psi(., t)|^2 on the drift grid"""
        return self.grid, np.abs(self._weights(t) @ self._basis) ** 2

    def _build_spline(self, t: float) -> CubicHermiteSpline:
        """
        Hermite spline through (psi, psi') with slopes (psi', psi'') on the grid.

        chi'' = (x - E) chi and chi''' = chi + (x - E) chi' give the slopes
        from the two tabulated bases.
        """
        w = self._weights(t)
        ew = self.energies * w
        mix = np.stack([w.real, w.imag, ew.real, ew.imag])
        base = mix @ self._basis
        prime = mix @ self._basis_prime
        psi = base[0] + 1j * base[1]
        e_psi = base[2] + 1j * base[3]
        dpsi = prime[0] + 1j * prime[1]
        e_dpsi = prime[2] + 1j * prime[3]
        x = self.grid
        d2psi = x * psi - e_psi
        d3psi = psi + x * dpsi - e_dpsi
        values = np.stack([psi.real, psi.imag, dpsi.real, dpsi.imag], axis=-1)
        slopes = np.stack([dpsi.real, dpsi.imag, d2psi.real, d2psi.imag], axis=-1)
        return CubicHermiteSpline(x, values, slopes, axis=0)

    def drift(self, x: ArrayLike, t: float) -> ArrayLike:
        """
        Nelson drift from the tabulated spline; points beyond the grid fall
        back to direct Airy sums
        """
        xs = np.asarray(x, dtype=float)
        flat = np.atleast_1d(xs)
        table = self._spline_at(float(t))(np.clip(flat, 0.0, self.grid_max))
        psi = table[:, 0] + 1j * table[:, 1]
        dpsi = table[:, 2] + 1j * table[:, 3]
        outside = flat > self.grid_max
        if np.any(outside):
            psi[outside] = self._exact(flat[outside], t, derivative=False)
            dpsi[outside] = self._exact(flat[outside], t, derivative=True)
        bad = (np.abs(psi) < 1e-300) | (flat <= 0.0)
        if np.any(bad):
            where = float(flat[int(np.flatnonzero(bad)[0])])
            raise NodeSingularity(f"{self.name}: psi vanishes at x = {where:g}", x=where, t=t)
        ratio = dpsi / psi
        value = self.hbar_over_m * (ratio.real + ratio.imag)
        return float(value[0]) if xs.ndim == 0 else value.reshape(xs.shape)

    def density(self, x: ArrayLike, t: float) -> ArrayLike:
        value = np.abs(self.psi(x, t)) ** 2
        return float(value) if np.ndim(value) == 0 else value

    def initial_density(self, x: ArrayLike) -> ArrayLike:
        """Heaviside-truncated Gaussian of width zeta at altitude h"""
        xs = np.asarray(x, dtype=float)
        gauss = np.exp(-((xs - self.h) ** 2) / (2.0 * self.zeta ** 2)) / math.sqrt(2.0 * math.pi * self.zeta ** 2)
        return np.where(xs > 0.0, gauss, 0.0)

    def support(self, t: float) -> Tuple[float, float]:
        return (0.0, max(self.h, float(self.energies[-1])) + 6.0)


def gravity_coeffs(
    h: float,
    zeta: float,
    n_max: Optional[int] = None,
    min_norm: float = 0.999,
    grid_step: float = 4e-3,
) -> GravityModel:
    """
    Expand a Gaussian packet (altitude h, width zeta) on the Airy eigenbasis

    c_n = (8 pi zeta^2)^(1/4) / Ai'(-E_n) * Ai(h - E_n + zeta^4)
          * exp[zeta^2 (h - E_n + 2 zeta^4 / 3)]

    Args:
        h: Initial altitude (x0 units)
        zeta: Initial width (x0 units), zeta/h < 0.2
        n_max: Number of eigenstates; None picks the smallest count reaching
            a raw norm of 0.9999, capped at 50
        min_norm: Smallest acceptable raw sum of c_n^2
        grid_step: Spacing of the tabulated drift grid

    Returns:
        GravityModel with renormalized coefficients
    """
    if h <= 0.0 or zeta <= 0.0:
        raise ValidationException(f"h and zeta must be positive, got h={h}, zeta={zeta}")
    if zeta / h >= 0.2:
        raise ValidationException(f"zeta/h must be < 0.2, got {zeta / h:.3g}")

    if n_max is None:
        energies = airy_zeros(AUTO_N_MAX_CAP)
        raw = _raw_coefficients(h, zeta, energies)
        cumulative = np.cumsum(raw ** 2)
        reached = np.flatnonzero(cumulative >= AUTO_NORM_TARGET)
        count = int(reached[0]) + 1 if len(reached) else AUTO_N_MAX_CAP
        energies, raw = energies[:count], raw[:count]
    else:
        if not 1 <= n_max <= MAX_ZEROS:
            raise ValidationException(f"n_max must lie in [1, {MAX_ZEROS}], got {n_max}")
        energies = airy_zeros(n_max)
        raw = _raw_coefficients(h, zeta, energies)

    raw_norm = float(np.sum(raw ** 2))
    if raw_norm < min_norm:
        raise TruncationTooSevere(
            f"{len(energies)} eigenstates keep only {raw_norm:.4f} of the norm (need {min_norm})",
            raw_norm=raw_norm,
        )
    if raw_norm < 0.999:
        logger.warning(
            "Gravity expansion h=%g zeta=%g n_max=%d keeps %.4f of the norm; renormalizing",
            h, zeta, len(energies), raw_norm,
        )
    coeffs = raw / math.sqrt(raw_norm)
    return GravityModel(h, zeta, energies, coeffs, raw_norm=raw_norm, grid_step=grid_step)


def gravity_psi(model: GravityModel, x: ArrayLike, t: float) -> ArrayLike:
    """Wavefunction of a gravity model by direct Airy summation"""
    return model.psi(x, t)
