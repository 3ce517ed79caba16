"""
Base Model: Abstract base class for all BornLens wavefunction models
"""

from abc import ABC, abstractmethod
from typing import Dict, Tuple, Union

import numpy as np

from .exceptions import NodeSingularity

ArrayLike = Union[float, np.ndarray]

# |psi| below this is treated as a node
PSI_FLOOR = 1e-300


def drift_from_psi(psi: ArrayLike, dpsi_dx: ArrayLike, hbar_over_m: float) -> ArrayLike:
    """
    Nelson drift from a wavefunction and its spatial derivative.

    With psi = R exp(iS), dpsi/psi = d(ln R) + i dS, so
    b = (hbar/m) dS + (hbar/m) d(ln R) = (hbar/m) (Re + Im)(dpsi/psi),
    the phase-gradient term plus the osmotic term 2 D_Q d(ln R).

    Args:
        psi: Wavefunction value(s)
        dpsi_dx: Spatial derivative(s) at the same points
        hbar_over_m: hbar/m in the scenario's units

    Returns:
        Drift velocity, scalar or array matching the inputs

    Raises:
        NodeSingularity if |psi| is below PSI_FLOOR anywhere
    """
    psi_arr = np.asarray(psi, dtype=complex)
    dpsi_arr = np.asarray(dpsi_dx, dtype=complex)
    bad = np.abs(psi_arr) < PSI_FLOOR
    if np.any(bad):
        raise NodeSingularity(
            f"|psi| below {PSI_FLOOR:g} at {int(np.count_nonzero(bad))} point(s)"
        )
    ratio = dpsi_arr / psi_arr
    b = hbar_over_m * (ratio.real + ratio.imag)
    if np.ndim(b) == 0:
        return float(b)
    return b


class WavefunctionModel(ABC):
    """
    Abstract base class for analytic and semi-analytic wavefunctions.

    Subclasses provide psi, its spatial derivative and a support window;
    the Born density and the Nelson drift follow from those. Instances are
    immutable after construction and safe to share between threads.
    """

    #: hbar/m in scenario units
    hbar_over_m: float = 1.0

    def __init__(self, name: str = None):
        self.name = name or self.__class__.__name__

    @property
    def diffusion(self) -> float:
        """Quantum diffusion coefficient D_Q = hbar/2m"""
        return 0.5 * self.hbar_over_m

    @abstractmethod
    def psi(self, x: ArrayLike, t: float) -> ArrayLike:
        """Complex amplitude at (x, t)"""
        pass

    @abstractmethod
    def dpsi_dx(self, x: ArrayLike, t: float) -> ArrayLike:
        """Spatial derivative of the amplitude at (x, t)"""
        pass

    @abstractmethod
    def support(self, t: float) -> Tuple[float, float]:
        """
        A window that contains essentially all of |psi(., t)|^2.

        Used to lay out histogram grids and to sample the Born density.
        """
        pass

    def density(self, x: ArrayLike, t: float) -> ArrayLike:
        """Born density |psi|^2"""
        return np.abs(self.psi(x, t)) ** 2

    def drift(self, x: ArrayLike, t: float) -> ArrayLike:
        """Nelson drift b(x, t)"""
        psi = self.psi(x, t)
        bad = np.abs(np.asarray(psi)) < PSI_FLOOR
        if np.any(bad):
            where = float(np.asarray(x, dtype=float).flat[int(np.flatnonzero(bad)[0])])
            raise NodeSingularity(f"{self.name}: psi vanishes at x = {where:g}", x=where, t=t)
        return drift_from_psi(psi, self.dpsi_dx(x, t), self.hbar_over_m)

    def describe(self) -> Dict[str, str]:
        """
        Get a short description of this model

        Returns:
            Dictionary with the model name and docstring
        """
        return {
            "name": self.name,
            "description": (self.__doc__ or "No description available").strip(),
        }
