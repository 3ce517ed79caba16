"""
BornLens: Nelson stochastic trajectories and their relaxation to the Born rule
"""

__version__ = "0.1.0"
__author__ = "BornLens Team"

from .config import BornLensConfig, StudySpec
from .base_model import WavefunctionModel
from .base_study import BaseStudy, StudyReport
from .registry import ModelRegistry, StudyRegistry, register_model, register_study
from .exceptions import (
    BornLensException,
    ConfigurationException,
    ValidationException,
    StudyException,
)
from . import experiments
from .orchestrator import BornLensOrchestrator, RunResult

__all__ = [
    "BornLensOrchestrator",
    "RunResult",
    "BornLensConfig",
    "StudySpec",
    "WavefunctionModel",
    "BaseStudy",
    "StudyReport",
    "ModelRegistry",
    "StudyRegistry",
    "register_model",
    "register_study",
    "BornLensException",
    "ConfigurationException",
    "ValidationException",
    "StudyException",
    "experiments",
]
