"""
Registries: map scenario names to wavefunction models and CLI verbs to studies
"""

from typing import Dict, List, Optional, Type

from .base_model import WavefunctionModel
from .base_study import BaseStudy


class ModelRegistry:
    """
    Registry of wavefunction models, keyed by scenario name.
    """

    _instance = None
    _models: Dict[str, Type[WavefunctionModel]] = {}

    def __new__(cls):
        """Singleton pattern to ensure single registry instance"""
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    @classmethod
    def register(cls, name: str, model_class: Type[WavefunctionModel]):
        """
        Register a model class

        Args:
            name: Scenario identifier
            model_class: Model class (must inherit from WavefunctionModel)
        """
        if not issubclass(model_class, WavefunctionModel):
            raise TypeError(f"{model_class} must inherit from WavefunctionModel")
        cls._models[name] = model_class

    @classmethod
    def get(cls, name: str) -> Optional[Type[WavefunctionModel]]:
        return cls._models.get(name)

    @classmethod
    def list_models(cls) -> List[str]:
        return sorted(cls._models.keys())


class StudyRegistry:
    """
    Registry of studies, keyed by CLI verb.
    Enables dispatch from the command line without a hard-coded table.
    """

    _instance = None
    _studies: Dict[str, Type[BaseStudy]] = {}

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    @classmethod
    def register(cls, name: str, study_class: Type[BaseStudy]):
        """
        Register a study class

        Args:
            name: CLI verb
            study_class: Study class (must inherit from BaseStudy)
        """
        if not issubclass(study_class, BaseStudy):
            raise TypeError(f"{study_class} must inherit from BaseStudy")
        cls._studies[name] = study_class

    @classmethod
    def unregister(cls, name: str):
        if name in cls._studies:
            del cls._studies[name]

    @classmethod
    def get(cls, name: str) -> Optional[Type[BaseStudy]]:
        return cls._studies.get(name)

    @classmethod
    def list_studies(cls) -> List[str]:
        return sorted(cls._studies.keys())


def register_model(name: str):
    """
    Decorator to register a wavefunction model

    Usage:
        @register_model("double-slit")
        class DoubleSlitModel(WavefunctionModel):
            ...
    """
    def decorator(model_class: Type[WavefunctionModel]):
        ModelRegistry.register(name, model_class)
        return model_class
    return decorator


def register_study(name: str):
    """
    Decorator to register a study under a CLI verb

    Usage:
        @register_study("gravity")
        class GravityStudy(BaseStudy):
            ...
    """
    def decorator(study_class: Type[BaseStudy]):
        study_class.verb = name
        StudyRegistry.register(name, study_class)
        return study_class
    return decorator
