"""
Studies for BornLens; importing this package registers every verb
"""

from .double_slit import DoubleSlitStudy
from .oscillator import OscillatorStudy
from .barrier import BarrierStudy
from .superposition import SuperpositionStudy
from .gravity import GravityStudy

__all__ = [
    "DoubleSlitStudy",
    "OscillatorStudy",
    "BarrierStudy",
    "SuperpositionStudy",
    "GravityStudy",
]
