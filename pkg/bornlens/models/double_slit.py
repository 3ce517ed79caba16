"""
Double slit: two free Gaussian packets of width sigma centred at +-a.

Units hbar = m = a = 1, so hbar/m = 1, D_Q = 1/2 and times are in tau = m a^2 / hbar.
With s = sigma^2 + i t each packet evolves as (sigma^2/s)^(1/2) exp(-(x -+ a)^2 / 2s).
"""

import math
from typing import Tuple

import numpy as np

from ..base_model import ArrayLike, WavefunctionModel
from ..exceptions import NodeSingularity, ValidationException
from ..registry import register_model


@register_model("double-slit")
class DoubleSlitModel(WavefunctionModel):
    """Two-slit superposition of spreading Gaussians (hbar = m = a = 1)"""

    hbar_over_m = 1.0

    def __init__(self, sigma: float, a: float = 1.0):
        if not 0.0 < sigma < 1.0:
            raise ValidationException(f"sigma must lie in (0, 1) in units of a, got {sigma}")
        if a < 0.0:
            raise ValidationException(f"slit half-separation must be >= 0, got {a}")
        super().__init__(name=f"double-slit(sigma={sigma:g})")
        self.sigma = float(sigma)
        self.a = float(a)
        overlap = math.exp(-self.a ** 2 / self.sigma ** 2)
        self._norm = (2.0 * self.sigma * math.sqrt(math.pi) * (1.0 + overlap)) ** -0.5
        self._overlap = overlap

    @classmethod
    def example(cls) -> "DoubleSlitModel":
        return cls(sigma=0.3)

    def _exponents(self, x: np.ndarray, t: float):
        s = complex(self.sigma ** 2, t)
        z_plus = -((x - self.a) ** 2) / (2.0 * s)
        z_minus = -((x + self.a) ** 2) / (2.0 * s)
        return s, z_plus, z_minus

    def psi(self, x: ArrayLike, t: float) -> ArrayLike:
        xs = np.asarray(x, dtype=float)
        s, zp, zm = self._exponents(xs, t)
        prefactor = self._norm * np.sqrt(self.sigma ** 2 / s)
        value = prefactor * (np.exp(zp) + np.exp(zm))
        return complex(value) if np.ndim(value) == 0 else value

    def dpsi_dx(self, x: ArrayLike, t: float) -> ArrayLike:
        xs = np.asarray(x, dtype=float)
        s, zp, zm = self._exponents(xs, t)
        prefactor = self._norm * np.sqrt(self.sigma ** 2 / s)
        value = -prefactor * ((xs - self.a) * np.exp(zp) + (xs + self.a) * np.exp(zm)) / s
        return complex(value) if np.ndim(value) == 0 else value

    def density(self, x: ArrayLike, t: float) -> ArrayLike:
        """Closed-form |psi|^2, normalized to one for every t"""
        xs = np.asarray(x, dtype=float)
        sig2, a = self.sigma ** 2, self.a
        d = sig2 ** 2 + t * t
        prefactor = self.sigma / (2.0 * math.sqrt(math.pi * d) * (1.0 + self._overlap))
        value = prefactor * (
            np.exp(-sig2 * (xs + a) ** 2 / d)
            + np.exp(-sig2 * (xs - a) ** 2 / d)
            + 2.0 * np.exp(-sig2 * (xs ** 2 + a ** 2) / d) * np.cos(2.0 * t * a * xs / d)
        )
        return float(value) if np.ndim(value) == 0 else value

    def drift(self, x: ArrayLike, t: float) -> ArrayLike:
        """
        (Re + Im) of psi'/psi, evaluated with the exponents shifted by their
        larger real part so that far tails do not underflow
        """
        xs = np.asarray(x, dtype=float)
        s, zp, zm = self._exponents(xs, t)
        shift = np.maximum(zp.real, zm.real)
        wp = np.exp(zp - shift)
        wm = np.exp(zm - shift)
        total = wp + wm
        bad = np.abs(total) < 1e-300
        if np.any(bad):
            where = float(xs.flat[int(np.flatnonzero(bad)[0])]) if xs.ndim else float(xs)
            raise NodeSingularity(f"{self.name}: psi vanishes", x=where, t=t)
        ratio = -((xs - self.a) * wp + (xs + self.a) * wm) / (s * total)
        value = self.hbar_over_m * (ratio.real + ratio.imag)
        return float(value) if np.ndim(value) == 0 else value

    def spread(self, t: float) -> float:
        """Standard deviation of one slit's density at time t"""
        return math.sqrt((self.sigma ** 4 + t * t) / (2.0 * self.sigma ** 2))

    def support(self, t: float) -> Tuple[float, float]:
        half = self.a + 8.0 * self.spread(t)
        return (-half, half)
