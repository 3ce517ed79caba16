"""
Airy function helpers for the gravity model.

Values come from ``scipy.special.airy``. Zeros are refined with ``brentq``
inside brackets placed around the asymptotic zero formula. A Maclaurin
series evaluator is kept as an independent cross-check near the origin.
"""

import logging
import math
from functools import lru_cache
from typing import Tuple, Union

import numpy as np
from scipy import optimize, special

from ..exceptions import AiryDomainError, ValidationException

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

#: beyond +AIRY_LIMIT Ai underflows and is saturated to 0
AIRY_LIMIT = 100.0
MAX_ZEROS = 100

AI0 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
AIP0 = -(3.0 ** (-1.0 / 3.0)) / math.gamma(1.0 / 3.0)


def _airy_pair(x: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(x, dtype=float)
    if np.any(arr < -AIRY_LIMIT):
        raise AiryDomainError(
            f"Airy evaluation below x = -{AIRY_LIMIT:g} (min {float(arr.min()):g}) "
            "loses precision on the oscillatory side"
        )
    if np.any(~np.isfinite(arr)):
        raise AiryDomainError("Airy evaluation at a non-finite argument")
    ai, aip, _, _ = special.airy(np.minimum(arr, AIRY_LIMIT))
    far = arr > AIRY_LIMIT
    if np.any(far):
        ai = np.where(far, 0.0, ai)
        aip = np.where(far, 0.0, aip)
    return ai, aip


def _unwrap(value: np.ndarray, like: ArrayLike) -> ArrayLike:
    if np.ndim(like) == 0:
        return float(value)
    return value


def airy_ai(x: ArrayLike) -> ArrayLike:
    """First Airy function Ai(x)"""
    ai, _ = _airy_pair(x)
    return _unwrap(ai, x)


def airy_ai_prime(x: ArrayLike) -> ArrayLike:
    """Derivative Ai'(x)"""
    _, aip = _airy_pair(x)
    return _unwrap(aip, x)


def airy_ai_and_prime(x: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """Ai and Ai' in one evaluation"""
    ai, aip = _airy_pair(x)
    return _unwrap(ai, x), _unwrap(aip, x)


def _zero_guess(k: int) -> float:
    z = 3.0 * math.pi * (4 * k - 1) / 8.0
    return z ** (2.0 / 3.0) * (1.0 + 5.0 / 48.0 * z ** -2 - 5.0 / 36.0 * z ** -4)


@lru_cache(maxsize=None)
def _zero(k: int) -> float:
    guess = _zero_guess(k)
    # zeros are spaced by about pi / sqrt(E)
    half_width = 0.25 * math.pi / math.sqrt(guess)
    lo, hi = guess - half_width, guess + half_width
    f = lambda e: float(special.airy(-e)[0])
    return optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def airy_zeros(k: int) -> np.ndarray:
    """
    First k zeros of Ai, returned as positive numbers E_n with Ai(-E_n) = 0

    Args:
        k: Number of zeros, 1 <= k <= 100

    Returns:
        Strictly increasing array of length k
    """
    if not 1 <= int(k) <= MAX_ZEROS:
        raise ValidationException(f"airy_zeros needs 1 <= k <= {MAX_ZEROS}, got {k}")
    return np.array([_zero(n) for n in range(1, int(k) + 1)])


def airy_maclaurin(x: ArrayLike, terms: int = 120) -> Tuple[ArrayLike, ArrayLike]:
    """
    Ai and Ai' from their Maclaurin series

    Accurate to about 1e-12 relative on [-8, 3]; cancellation grows for
    larger positive x where Ai is exponentially small.

    Args:
        x: Evaluation point(s)
        terms: Number of series terms

    Returns:
        (Ai(x), Ai'(x))
    """
    arr = np.asarray(x, dtype=float)
    x3 = arr ** 3
    f = np.ones_like(arr)
    g = arr.copy()
    df = np.zeros_like(arr)
    dg = np.ones_like(arr)
    a = np.ones_like(arr)
    b = arr.copy()
    p = arr ** 2 / 2.0
    q = np.ones_like(arr)
    df = df + p
    for k in range(1, terms):
        a = a * x3 / ((3 * k - 1) * (3 * k))
        b = b * x3 / ((3 * k) * (3 * k + 1))
        q = q * x3 / ((3 * k - 2) * (3 * k))
        f = f + a
        g = g + b
        dg = dg + q
        if k >= 2:
            p = p * x3 / ((3 * k - 3) * (3 * k - 1))
            df = df + p
    ai = AI0 * f + AIP0 * g
    aip = AI0 * df + AIP0 * dg
    return _unwrap(ai, x), _unwrap(aip, x)


def gaussian_airy_integral(a: float, b: float) -> float:
    """
    Closed form of the integral over the real line of exp(-u^2) Ai(2au + b)

    Equals sqrt(pi) exp(a^2 b + 2a^6/3) Ai(b + a^4).
    """
    return math.sqrt(math.pi) * math.exp(a * a * b + 2.0 * a ** 6 / 3.0) * airy_ai(b + a ** 4)
