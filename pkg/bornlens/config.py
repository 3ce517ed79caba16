"""
Configuration management for BornLens

Process settings live in a dataclass loaded from the environment; study
specifications are pydantic models loaded from one JSON document with one
object per scenario, keyed by CLI verb.
"""

import json
import hashlib
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Annotated, Any, Dict, Iterable, List, Literal, Optional, Type, get_origin

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .exceptions import ConfigurationException
from .utils import canonical_json

logger = logging.getLogger(__name__)


@dataclass
class BornLensConfig:
    """
    Process-level settings. None of these change results.
    """
    threads: int = 0  # 0 = one worker per CPU
    output_dir: str = "results"
    verbose: bool = False
    log_level: str = "INFO"
    stream_block: int = 1024  # trajectories per RNG lane

    @classmethod
    def from_env(cls, env_file: str = ".env") -> "BornLensConfig":
        """
        Load configuration from environment variables

        Args:
            env_file: Path to .env file

        Returns:
            BornLensConfig instance
        """
        load_dotenv(env_file)

        try:
            return cls(
                threads=int(os.getenv("BORNLENS_THREADS", "0")),
                output_dir=os.getenv("BORNLENS_OUTPUT_DIR", "results"),
                verbose=os.getenv("BORNLENS_VERBOSE", "false").lower() == "true",
                log_level=os.getenv("BORNLENS_LOG_LEVEL", "INFO").upper(),
            )
        except ValueError as e:
            raise ConfigurationException(f"Invalid BORNLENS_* environment value: {e}") from e

    def worker_count(self) -> int:
        """Resolved number of worker threads"""
        if self.threads > 0:
            return self.threads
        return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# Study specifications
# ---------------------------------------------------------------------------

PositiveFloat = Annotated[float, Field(gt=0)]


class StudySpec(BaseModel):
    """Fields shared by every study"""

    model_config = ConfigDict(extra="forbid")

    n: int = Field(100_000, ge=1000, description="ensemble size")
    dt: float = Field(1e-4, gt=0)
    t_end: float = Field(1.0, gt=0)
    observe_every: float = Field(1e-3, gt=0)
    bins: int = Field(200, ge=2)
    master_seed: int = Field(0, ge=0, lt=2**64)
    scheme: Literal["heun", "euler-maruyama"] = "heun"

    @model_validator(mode="after")
    def _check_cadence(self):
        dts = self.dt if isinstance(self.dt, list) else [self.dt]
        if self.observe_every < max(dts):
            raise ValueError("observe_every must be >= dt")
        return self


class DoubleSlitSpec(StudySpec):
    """Two Gaussian slits at +-a, delta-pair start"""

    sigma: List[Annotated[float, Field(ge=0.09, le=0.7)]] = Field(
        default_factory=lambda: [0.2, 0.3, 0.4, 0.5, 0.6, 0.7], min_length=1
    )
    t_end: float = Field(0.5, gt=0)
    observe_every: float = Field(5e-4, gt=0)
    interference_dt: float = Field(0.005, gt=0, le=0.01)
    interference_horizon: float = Field(3.0, gt=0)
    min_relative_height: float = Field(1e-3, gt=0, lt=1)
    snapshot_times: List[PositiveFloat] = Field(default_factory=lambda: [0.09])
    fanout: int = Field(0, ge=0, description="trajectories dumped for the fan-out plot")
    control: bool = True
    control_t_end: float = Field(0.1, gt=0)


class OscillatorSpec(StudySpec):
    """Gaussian packet in the harmonic well, delta start at the origin"""

    b0: List[Annotated[float, Field(ge=0.125, le=32)]] = Field(
        default_factory=lambda: [0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
        min_length=1,
    )
    theta: List[Annotated[float, Field(ge=5e-4, le=1e-2)]] = Field(
        default_factory=lambda: [5e-4, 1e-3, 5e-3, 1e-2], min_length=1
    )
    A0: float = Field(0.0, description="initial phase curvature A(0)")
    t_end: float = Field(5.0, gt=0)
    gamma_step: float = Field(1e-4, gt=0)
    window: int = Field(10, ge=2)
    series_every: float = Field(1e-3, gt=0, description="spacing of the written gamma series")
    monte_carlo_b0: Optional[float] = Field(0.5, gt=0)
    mc_t_end: float = Field(1.0, gt=0)
    checkpoints: int = Field(10, ge=1)
    dt: float = Field(1e-3, gt=0)
    observe_every: float = Field(1e-2, gt=0)


class BarrierSpec(StudySpec):
    """First excited state; fraction of trajectories crossing the node"""

    dt: List[PositiveFloat] = Field(default_factory=lambda: [0.1, 1e-3, 1e-6], min_length=1)
    n: int = Field(2000, ge=1000)
    t_end: float = Field(50.0, gt=0)
    starts: List[float] = Field(default_factory=lambda: [1.0, -1.0], min_length=1)
    observe_every: float = Field(0.5, gt=0)
    control_dt: float = Field(1e-4, gt=0)
    control_t_end: float = Field(1.0, gt=0)
    control_start: float = -1.0
    reduced_n: int = Field(1000, ge=1, description="ensemble size for the smallest time steps")
    reduced_below_dt: float = Field(1e-5, gt=0)
    blowup_limit: float = Field(1e12, gt=0)


class SuperpositionSpec(StudySpec):
    """cos(angle) first excited + sin(angle) ground state, delta start"""

    mix_angle_deg: List[Annotated[float, Field(ge=0, le=90)]] = Field(
        default_factory=lambda: [0.1], min_length=1
    )
    start: float = 1.0
    t_end: float = Field(8.0, gt=0)
    dt: float = Field(1e-3, gt=0)
    observe_every: float = Field(0.02, gt=0)
    floor_factor: float = Field(2.0, gt=1)
    control: bool = True
    control_t_end: float = Field(2.0, gt=0)


class GravitySpec(StudySpec):
    """Packet above a mirror in uniform gravity, delta start at altitude h"""

    h: List[Annotated[float, Field(ge=1.5, le=5.0)]] = Field(
        default_factory=lambda: [1.5, 2.5, 3.5, 5.0], min_length=1
    )
    zeta: float = Field(0.09, gt=0)
    n_max: int = Field(50, ge=1, le=100)
    min_norm: float = Field(0.5, gt=0, le=1)
    t_end: float = Field(1.0, gt=0)
    observe_every: float = Field(5e-3, gt=0)
    p: List[PositiveFloat] = Field(default_factory=lambda: [0.0025, 0.0152, 0.05, 0.152], min_length=1)
    reference_p: float = Field(0.05, gt=0)
    band_p: List[PositiveFloat] = Field(
        default_factory=lambda: [0.0025, 0.0152], description="prominences spanning the tau_int/tau1 error band"
    )
    ripple_tolerance: float = Field(0.05, gt=0, description="largest per-step shift of a followed t = 0 peak")
    interference_dt: float = Field(1e-3, gt=0)
    snapshot_times: List[PositiveFloat] = Field(default_factory=lambda: [0.005, 0.07, 0.5])
    dump_trajectory: bool = False
    floor_factor: float = Field(2.0, gt=1)
    median_window: int = Field(5, ge=1)
    phase_prominence: float = Field(0.1, gt=0, description="minimum prominence of the L_H extrema, natural-log units")
    control_t_end: float = Field(0.2, gt=0)


SPEC_CLASSES: Dict[str, Type[StudySpec]] = {
    "double-slit": DoubleSlitSpec,
    "oscillator": OscillatorSpec,
    "barrier": BarrierSpec,
    "superposition": SuperpositionSpec,
    "gravity": GravitySpec,
}


# ---------------------------------------------------------------------------
# Loading and overrides
# ---------------------------------------------------------------------------

def load_study_config(path: Optional[str]) -> Dict[str, Any]:
    """
    Read the study configuration document

    Args:
        path: JSON file, or None for all defaults

    Returns:
        Mapping from verb to the raw scenario object
    """
    if path is None:
        return {}
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigurationException(f"Config file not found: {path}")
    try:
        document = json.loads(config_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigurationException(f"Config file {path} is not valid JSON: {e}") from e
    if not isinstance(document, dict):
        raise ConfigurationException(f"Config file {path} must hold a JSON object")
    unknown = sorted(set(document) - set(SPEC_CLASSES))
    if unknown:
        raise ConfigurationException(
            f"Unknown scenario(s) in {path}: {', '.join(unknown)}. "
            f"Known: {', '.join(sorted(SPEC_CLASSES))}"
        )
    return document


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _is_list_field(spec_class: Type[StudySpec], name: str) -> bool:
    annotation = spec_class.model_fields[name].annotation
    return get_origin(annotation) is list


def apply_overrides(
    document: Dict[str, Any],
    overrides: Iterable[str],
    active: str,
) -> Dict[str, Any]:
    """
    Apply ``KEY=VALUE`` overrides to a configuration document

    Keys are dotted paths relative to the active scenario unless the first
    segment names a scenario. A scalar assigned to a list-valued field is
    wrapped into a one-element list.

    Args:
        document: Raw configuration (not modified)
        overrides: ``KEY=VALUE`` strings
        active: Verb whose object receives unqualified keys

    Returns:
        New document with the overrides applied
    """
    result = {verb: dict(obj) for verb, obj in document.items()}
    for item in overrides:
        if "=" not in item:
            raise ConfigurationException(f"Override must look like KEY=VALUE, got: {item}")
        key, text = item.split("=", 1)
        segments = [s for s in key.strip().split(".") if s]
        if segments and segments[0] in SPEC_CLASSES and len(segments) > 1:
            scenario, segments = segments[0], segments[1:]
        else:
            scenario = active
        spec_class = SPEC_CLASSES[scenario]
        if len(segments) != 1 or segments[0] not in spec_class.model_fields:
            raise ConfigurationException(f"Unknown configuration key for {scenario}: {key}")
        name = segments[0]
        value = _parse_value(text.strip())
        if _is_list_field(spec_class, name) and not isinstance(value, list):
            value = [value]
        result.setdefault(scenario, {})[name] = value
    return result


def resolve_spec(
    verb: str,
    document: Dict[str, Any],
    overrides: Iterable[str] = (),
    seed: Optional[int] = None,
) -> StudySpec:
    """
    Build the validated spec for one verb

    Args:
        verb: Scenario name
        document: Raw configuration document
        overrides: ``KEY=VALUE`` strings
        seed: Master seed; wins over the document

    Returns:
        Validated StudySpec subclass instance
    """
    if verb not in SPEC_CLASSES:
        raise ConfigurationException(f"Unknown scenario: {verb}")
    resolved = apply_overrides(document, overrides, active=verb)
    raw = dict(resolved.get(verb, {}))
    if seed is not None:
        raw["master_seed"] = seed
    try:
        spec = SPEC_CLASSES[verb].model_validate(raw)
    except ValidationError as e:
        raise ConfigurationException(f"Invalid {verb} configuration:\n{e}") from e
    logger.debug("Resolved %s spec: %s", verb, spec.model_dump(mode="json"))
    return spec


def spec_hash(spec: BaseModel) -> str:
    """SHA-256 of the canonical JSON of a fully resolved spec"""
    payload = canonical_json(spec.model_dump(mode="json"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
