"""
Custom exceptions for BornLens
"""

from typing import Any, Dict, Optional


class BornLensException(Exception):
    """Base exception for all BornLens errors"""
    pass


class ConfigurationException(BornLensException):
    """Exception raised for configuration errors"""
    pass


class ValidationException(BornLensException):
    """Exception raised when an operation's preconditions are violated"""
    pass


class StudyException(BornLensException):
    """Exception raised when a study cannot be completed"""
    pass


# ---------------------------------------------------------------------------
# models
# ---------------------------------------------------------------------------

class NodeSingularity(BornLensException):
    """The wavefunction vanishes (or underflows) where a drift was requested"""

    def __init__(
        self,
        message: str,
        x: Optional[float] = None,
        t: Optional[float] = None,
        trajectory_id: Optional[int] = None,
    ):
        super().__init__(message)
        self.x = x
        self.t = t
        self.trajectory_id = trajectory_id


class AiryDomainError(BornLensException):
    """Airy evaluation requested far on the oscillatory side"""
    pass


class DivergentGamma(BornLensException):
    """gamma(t) requested below the time where its denominator underflows"""
    pass


class TruncationTooSevere(BornLensException):
    """The eigenbasis expansion retains too little of the initial norm"""

    def __init__(self, message: str, raw_norm: float):
        super().__init__(message)
        self.raw_norm = raw_norm


# ---------------------------------------------------------------------------
# sde
# ---------------------------------------------------------------------------

class BlowUp(BornLensException):
    """A trajectory left the admissible range"""

    def __init__(
        self,
        message: str,
        trajectory_id: Optional[int] = None,
        t: Optional[float] = None,
    ):
        super().__init__(message)
        self.trajectory_id = trajectory_id
        self.t = t


# ---------------------------------------------------------------------------
# stats
# ---------------------------------------------------------------------------

class TooFewSamples(BornLensException):
    """Not enough samples for a meaningful histogram"""
    pass


class GridMismatch(BornLensException):
    """Two sampled curves do not share a grid"""
    pass


class SupportMismatch(BornLensException):
    """f carries mass where g vanishes"""
    pass


class FitDiverged(BornLensException):
    """A least-squares fit failed; best-effort parameters are attached"""

    def __init__(self, message: str, params: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.params = params or {}


class NeverConverged(BornLensException):
    """A statistic never drops below its threshold"""
    pass


class NoInterference(BornLensException):
    """No interference signature within the scanned horizon"""
    pass


class MonotoneSeries(BornLensException):
    """A series has no interior extrema"""
    pass


class EmptySeries(BornLensException):
    """Nothing to plot"""
    pass
