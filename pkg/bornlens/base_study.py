"""
Base Study: Abstract base class for all BornLens studies
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Type

from pydantic import BaseModel

from .config import BornLensConfig, StudySpec, spec_hash
from .exceptions import BornLensException

logger = logging.getLogger(__name__)


@dataclass
class StudyReport:
    """
    Result of one study run.

    ``points`` holds one record per grid point, already sorted by grid
    coordinates. ``series`` maps a relative path stem such as
    ``sigma=0.2/series_L1`` to a ``(times, values)`` pair; ``plots`` maps a
    relative stem to a ``PlotRequest``. The orchestrator turns both into files.
    """

    scenario: str
    spec: Dict[str, Any]
    spec_hash: str
    master_seed: int
    points: List[Dict[str, Any]] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    series: Dict[str, Any] = field(default_factory=dict)
    plots: Dict[str, Any] = field(default_factory=dict)
    tables: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready view; series and plots are written as separate files"""
        return {
            "scenario": self.scenario,
            "spec_hash": self.spec_hash,
            "master_seed": self.master_seed,
            "spec": self.spec,
            "points": self.points,
            "summary": self.summary,
        }

    def provenance(self) -> Dict[str, Any]:
        return {"spec_hash": self.spec_hash, "master_seed": self.master_seed}


class BaseStudy(ABC):
    """
    Abstract base class for all BornLens studies.
    A study turns one validated spec into a StudyReport.
    """

    #: CLI verb, set by ``register_study``
    verb: str = ""
    #: pydantic model accepted by ``run``
    spec_class: Type[StudySpec] = StudySpec

    def __init__(self, config: Optional[BornLensConfig] = None, name: str = None):
        """
        Initialize the base study

        Args:
            config: Process settings (threads, stream block size)
            name: Study name (defaults to class name)
        """
        self.config = config or BornLensConfig()
        self.name = name or self.__class__.__name__

    @abstractmethod
    def run(self, spec: StudySpec) -> StudyReport:
        """
        Execute the study.
        Must be implemented by subclasses.

        Args:
            spec: Validated study specification

        Returns:
            StudyReport with per-point records, series and plots
        """
        pass

    def new_report(self, spec: BaseModel) -> StudyReport:
        """Empty report tagged with the spec's provenance"""
        return StudyReport(
            scenario=self.verb,
            spec=spec.model_dump(mode="json"),
            spec_hash=spec_hash(spec),
            master_seed=spec.master_seed,
        )

    def _handle_error(self, error: Exception, context: str = "") -> str:
        """
        Turn a per-point analysis error into a record entry

        Args:
            error: The exception that occurred
            context: Context about where the error occurred

        Returns:
            "<ErrorName>: message"
        """
        if not isinstance(error, BornLensException):
            raise error
        message = f"{type(error).__name__}: {error}"
        logger.warning("%s (%s) %s", self.name, context or "-", message)
        return message

    def get_capabilities(self) -> Dict[str, str]:
        """
        Get a description of this study

        Returns:
            Dictionary with the verb and docstring
        """
        return {
            "name": self.name,
            "verb": self.verb,
            "description": (self.__doc__ or "No description available").strip(),
        }
