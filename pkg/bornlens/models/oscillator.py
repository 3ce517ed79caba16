"""
Harmonic oscillator models in units hbar = 1, m = 1/2, omega = 2.

The Schrodinger equation reads i psi_t = -psi_xx + x^2 psi, so hbar/m = 2,
D_Q = 1 and the eigenenergies are E_n = 2n + 1.

Gaussian ansatz: psi = (B/2pi)^(1/4) exp(-B x^2/4 + i A x^2/2 + i a) with

    A' = B^2/2 - 2A^2 - 2,   a' = -B/2,   B' = -4AB.

For A(0) = 0 the width equation has the closed form
B(t) = B0 / (cos^2 2t + (B0/2)^2 sin^2 2t), periodic with period pi/2.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple

import numpy as np
from scipy import integrate, special

from ..base_model import ArrayLike, WavefunctionModel
from ..exceptions import DivergentGamma, NodeSingularity, ValidationException
from ..registry import register_model

logger = logging.getLogger(__name__)

HBAR_OVER_M = 2.0
PERIOD = 0.5 * math.pi
#: relative tolerance of every ODE integration in this module
ODE_RTOL = 1e-12
ODE_ATOL = 1e-14
#: gamma is undefined this close to the delta start
GAMMA_T_FLOOR = 1e-12
#: absolute tolerance of the gamma quadrature; int B phi ~ B t near the start
GAMMA_ATOL = 1e-16


@dataclass(frozen=True)
class OscillatorGaussianState:
    """Gaussian packet parameters at time t"""

    A: float
    B: float
    a_phase: float
    t: float

    def drift_coefficient(self) -> float:
        return 2.0 * self.A - self.B

    def psi(self, x: ArrayLike) -> ArrayLike:
        xs = np.asarray(x, dtype=float)
        exponent = -0.25 * self.B * xs ** 2 + 0.5j * self.A * xs ** 2 + 1j * self.a_phase
        return (self.B / (2.0 * math.pi)) ** 0.25 * np.exp(exponent)


def _ansatz_rhs(_t: float, y: np.ndarray) -> np.ndarray:
    A, a_phase, B = y
    return np.array([0.5 * B * B - 2.0 * A * A - 2.0, -0.5 * B, -4.0 * A * B])


def oscillator_evolve(A0: float, B0: float, a0: float, t: float) -> OscillatorGaussianState:
    """
    Integrate the Gaussian ansatz equations from 0 to t

    Args:
        A0: Initial phase curvature
        B0: Initial inverse squared width (B0 > 0)
        a0: Initial global phase
        t: Final time (>= 0)

    Returns:
        OscillatorGaussianState at t
    """
    if B0 <= 0.0:
        raise ValidationException(f"B0 must be positive, got {B0}")
    if t < 0.0:
        raise ValidationException(f"t must be >= 0, got {t}")
    if t == 0.0:
        return OscillatorGaussianState(float(A0), float(B0), float(a0), 0.0)
    sol = integrate.solve_ivp(
        _ansatz_rhs, (0.0, t), [A0, a0, B0], method="DOP853", rtol=ODE_RTOL, atol=ODE_ATOL
    )
    A, a_phase, B = sol.y[:, -1]
    return OscillatorGaussianState(float(A), float(B), float(a_phase), float(t))


def oscillator_series(A0: float, B0: float, a0: float, times: Sequence[float]) -> np.ndarray:
    """
    A(t), a(t), B(t) on an increasing time grid starting at or after 0

    Returns:
        Array of shape (3, len(times)) with rows A, a, B
    """
    times = np.asarray(times, dtype=float)
    t_end = float(times[-1])
    if t_end == 0.0:
        return np.tile(np.array([[A0], [a0], [B0]]), (1, len(times)))
    sol = integrate.solve_ivp(
        _ansatz_rhs, (0.0, t_end), [A0, a0, B0], method="DOP853",
        t_eval=times, rtol=ODE_RTOL, atol=ODE_ATOL,
    )
    return sol.y


def width_closed_form(B0: float, t: ArrayLike) -> ArrayLike:
    """B(t) for A(0) = 0"""
    c = np.cos(2.0 * np.asarray(t))
    s = np.sin(2.0 * np.asarray(t))
    return B0 / (c * c + (0.5 * B0) ** 2 * s * s)


def curvature_closed_form(B0: float, t: ArrayLike) -> ArrayLike:
    """A(t) = -B'/(4B) for A(0) = 0"""
    tt = np.asarray(t)
    k2 = (0.5 * B0) ** 2
    q = np.cos(2.0 * tt) ** 2 + k2 * np.sin(2.0 * tt) ** 2
    return (k2 - 1.0) * np.sin(4.0 * tt) / (2.0 * q)


def integrated_width(B0: float, t: ArrayLike) -> ArrayLike:
    """
    Integral of B from 0 to t for A(0) = 0.

    Equals arctan((B0/2) tan 2t) continued across the poles of tan, so one
    period contributes exactly pi.
    """
    theta = 2.0 * np.asarray(t, dtype=float)
    g = np.arctan2(0.5 * B0 * np.sin(theta), np.cos(theta))
    return g + 2.0 * math.pi * np.round((theta - g) / (2.0 * math.pi))


def oscillator_drift(state: OscillatorGaussianState, x: ArrayLike) -> ArrayLike:
    """Nelson drift (2A - B) x of the Gaussian packet"""
    coefficient = state.drift_coefficient()
    if np.ndim(x) == 0:
        return coefficient * float(x)
    return coefficient * np.asarray(x, dtype=float)


@register_model("oscillator")
class OscillatorGaussianModel(WavefunctionModel):
    """Gaussian packet in the harmonic well, A(0) = 0 unless given"""

    hbar_over_m = HBAR_OVER_M

    def __init__(self, B0: float, A0: float = 0.0, a0: float = 0.0, t_max: float = 10.0):
        if B0 <= 0.0:
            raise ValidationException(f"B0 must be positive, got {B0}")
        super().__init__(name=f"oscillator(B0={B0:g})")
        self.B0, self.A0, self.a0 = float(B0), float(A0), float(a0)
        self._dense = None
        if self.A0 != 0.0:
            sol = integrate.solve_ivp(
                _ansatz_rhs, (0.0, t_max), [A0, a0, B0], method="DOP853",
                dense_output=True, rtol=ODE_RTOL, atol=ODE_ATOL,
            )
            self._dense = sol.sol
            self._t_max = t_max

    @classmethod
    def example(cls) -> "OscillatorGaussianModel":
        return cls(B0=0.5)

    def state(self, t: float) -> OscillatorGaussianState:
        if self._dense is None:
            return OscillatorGaussianState(
                float(curvature_closed_form(self.B0, t)),
                float(width_closed_form(self.B0, t)),
                self.a0 - 0.5 * float(integrated_width(self.B0, t)),
                float(t),
            )
        if t > self._t_max:
            raise ValidationException(f"t = {t} beyond the integrated horizon {self._t_max}")
        A, a_phase, B = self._dense(t)
        return OscillatorGaussianState(float(A), float(B), float(a_phase), float(t))

    def psi(self, x: ArrayLike, t: float) -> ArrayLike:
        return self.state(t).psi(x)

    def dpsi_dx(self, x: ArrayLike, t: float) -> ArrayLike:
        st = self.state(t)
        return (-0.5 * st.B + 1j * st.A) * np.asarray(x) * st.psi(x)

    def drift(self, x: ArrayLike, t: float) -> ArrayLike:
        return oscillator_drift(self.state(t), x)

    def support(self, t: float) -> Tuple[float, float]:
        half = 8.0 / math.sqrt(self.state(t).B)
        return (-half, half)


# ---------------------------------------------------------------------------
# Fokker-Planck precision and the Riccati ratio gamma = C / B
# ---------------------------------------------------------------------------

def _precision_rhs(_t: float, y: np.ndarray) -> np.ndarray:
    A, a_phase, B, v = y
    return np.array([
        0.5 * B * B - 2.0 * A * A - 2.0,
        -0.5 * B,
        -4.0 * A * B,
        2.0 * (2.0 * A - B) * v + 2.0,
    ])


def fokker_planck_precision(A0: float, B0: float, times: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Precision C(t) of the Gaussian Fokker-Planck solution started from a delta.

    The variance v = 1/C obeys v' = 2(2A - B) v + 2 with v(0) = 0, which is
    the Riccati equation C' = -2C(2A - B) - 2C^2 written for 1/C.

    Args:
        A0, B0: Initial ansatz parameters of the guiding wave
        times: Increasing output times (>= 0)

    Returns:
        (C, B) arrays on ``times``; C is inf at t = 0
    """
    times = np.asarray(times, dtype=float)
    t_end = float(times[-1])
    if t_end == 0.0:
        return np.full(len(times), np.inf), np.full(len(times), float(B0))
    sol = integrate.solve_ivp(
        _precision_rhs, (0.0, t_end), [A0, 0.0, B0, 0.0], method="DOP853",
        t_eval=times, rtol=ODE_RTOL, atol=1e-16,
    )
    variance = sol.y[3]
    with np.errstate(divide="ignore"):
        precision = 1.0 / variance
    return precision, sol.y[2]


def gamma_series(B_of_t: Callable[[float], float], times: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """
    gamma(t) and phi(t) = exp(-2 int_0^t B) on a time grid.

    gamma = 1 + phi / (2 int_0^t B phi), obtained from one ODE integration
    of (int B, int B phi).

    Args:
        B_of_t: Width parameter as a function of time
        times: Increasing times, all > 0

    Returns:
        (gamma, phi) arrays
    """
    times = np.asarray(times, dtype=float)
    if times[0] < GAMMA_T_FLOOR:
        raise DivergentGamma(f"gamma diverges at t = {times[0]:g}; first time must be >= {GAMMA_T_FLOOR:g}")

    def rhs(t, y):
        b = B_of_t(t)
        return [b, b * math.exp(-2.0 * y[0])]

    sol = integrate.solve_ivp(
        rhs, (0.0, float(times[-1])), [0.0, 0.0], method="DOP853",
        t_eval=times, rtol=ODE_RTOL, atol=GAMMA_ATOL,
    )
    if not sol.success:
        raise DivergentGamma(f"quadrature for gamma failed: {sol.message}")
    phi = np.exp(-2.0 * sol.y[0])
    denominator = 2.0 * sol.y[1]
    if np.any(denominator <= 1e-300):
        raise DivergentGamma("denominator of gamma underflows")
    return 1.0 + phi / denominator, phi


def riccati_gamma(B_of_t: Callable[[float], float], t: float) -> float:
    """
    gamma(t) = C(t)/B(t) from its pseudo-analytic quadrature, gamma(0) = inf

    Args:
        B_of_t: Width parameter as a function of time
        t: Time > 0

    Returns:
        gamma(t)
    """
    gamma, _ = gamma_series(B_of_t, [t])
    return float(gamma[0])


# ---------------------------------------------------------------------------
# Eigenstate mixtures
# ---------------------------------------------------------------------------

def _hermite_scale(n: int) -> float:
    return 1.0 / math.sqrt(2.0 ** n * math.factorial(n))


@register_model("oscillator-eigen")
class OscillatorEigenModel(WavefunctionModel):
    """
    cos(mix) psi_high + sin(mix) psi_low of two oscillator eigenstates.

    psi_n = pi^(-1/4) H_n(x) e^(-x^2/2) / sqrt(2^n n!), E_n = 2n + 1.
    """

    hbar_over_m = HBAR_OVER_M

    def __init__(self, mix_angle: float, n_low: int = 0, n_high: int = 1, node_guard: float = 1e-12):
        if n_low < 0 or n_high <= n_low:
            raise ValidationException(f"need 0 <= n_low < n_high, got ({n_low}, {n_high})")
        super().__init__(name=f"oscillator-eigen(mix={math.degrees(mix_angle):g}deg)")
        self.mix_angle = float(mix_angle)
        self.n_low, self.n_high = int(n_low), int(n_high)
        self.c_high = math.cos(self.mix_angle)
        self.c_low = math.sin(self.mix_angle)
        self.node_guard = float(node_guard)

    @classmethod
    def example(cls) -> "OscillatorEigenModel":
        return cls(mix_angle=math.radians(30.0))

    @classmethod
    def from_degrees(cls, degrees: float, **kwargs) -> "OscillatorEigenModel":
        return cls(math.radians(degrees), **kwargs)

    def energy(self, n: int) -> float:
        return 2.0 * n + 1.0

    def _poly(self, x: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray]:
        """P and P' where psi = pi^(-1/4) e^(-x^2/2) P(x, t)"""
        terms = ((self.c_low, self.n_low), (self.c_high, self.n_high))
        p = np.zeros(np.shape(x), dtype=complex)
        dp = np.zeros(np.shape(x), dtype=complex)
        for c, n in terms:
            if c == 0.0:
                continue
            phase = c * _hermite_scale(n) * np.exp(-1j * self.energy(n) * t)
            p = p + phase * special.eval_hermite(n, x)
            if n > 0:
                dp = dp + phase * 2.0 * n * special.eval_hermite(n - 1, x)
        return p, dp

    def psi(self, x: ArrayLike, t: float) -> ArrayLike:
        xs = np.asarray(x, dtype=float)
        p, _ = self._poly(xs, t)
        value = math.pi ** -0.25 * np.exp(-0.5 * xs ** 2) * p
        return complex(value) if np.ndim(value) == 0 else value

    def dpsi_dx(self, x: ArrayLike, t: float) -> ArrayLike:
        xs = np.asarray(x, dtype=float)
        p, dp = self._poly(xs, t)
        value = math.pi ** -0.25 * np.exp(-0.5 * xs ** 2) * (dp - xs * p)
        return complex(value) if np.ndim(value) == 0 else value

    def density(self, x: ArrayLike, t: float) -> ArrayLike:
        xs = np.asarray(x, dtype=float)
        p, _ = self._poly(xs, t)
        value = np.exp(-xs ** 2) * np.abs(p) ** 2 / math.sqrt(math.pi)
        return float(value) if np.ndim(value) == 0 else value

    def drift(self, x: ArrayLike, t: float) -> ArrayLike:
        """
        2 (Re + Im)(-x + P'/P); NodeSingularity inside the guard band where
        |P| / (|c_low| + |c_high|) < node_guard
        """
        xs = np.asarray(x, dtype=float)
        p, dp = self._poly(xs, t)
        scale = abs(self.c_low) + abs(self.c_high)
        bad = np.abs(p) < self.node_guard * scale
        if np.any(bad):
            where = float(xs.flat[int(np.flatnonzero(bad)[0])])
            raise NodeSingularity(f"{self.name}: x = {where:g} inside the node guard band", x=where, t=t)
        ratio = dp / p - xs
        value = self.hbar_over_m * (ratio.real + ratio.imag)
        return float(value) if np.ndim(value) == 0 else value

    def nodes(self, t: float, tol: float = 1e-12) -> np.ndarray:
        """
        Real zeros of psi(., t)

        For the (0, 1) pair the zero of P sits at x = -c0 e^(2it) / (sqrt2 c1);
        it is real only when sin 2t = 0 or c0 = 0. Other pairs use the
        polynomial roots of P.
        """
        coeffs = np.zeros(self.n_high + 1, dtype=complex)
        for c, n in ((self.c_low, self.n_low), (self.c_high, self.n_high)):
            if c == 0.0:
                continue
            herm = np.polynomial.hermite.herm2poly([0] * n + [1])
            coeffs[: len(herm)] += c * _hermite_scale(n) * np.exp(-1j * self.energy(n) * t) * herm
        poly = np.polynomial.Polynomial(coeffs).trim()
        roots = poly.roots()
        scale = max(1.0, float(np.max(np.abs(roots)))) if len(roots) else 1.0
        real = [r.real for r in roots if abs(r.imag) <= tol * scale]
        return np.sort(np.array(real, dtype=float))

    def support(self, t: float) -> Tuple[float, float]:
        half = math.sqrt(2.0 * self.n_high + 1.0) + 6.0
        return (-half, half)
