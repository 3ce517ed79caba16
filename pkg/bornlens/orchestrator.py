"""
BornLens Orchestrator: runs a study and writes its outputs.

Layout under the output directory:

    manifest.json                               every file of the run + sha256
    <scenario>/report.json                      StudyReport
    <scenario>/<param=value>/series_<kind>.csv  header t,value
    <scenario>/<param=value>/<name>.svg

Every file goes through a temporary sibling and an atomic rename; nothing in
the outputs depends on the thread count or the wall clock.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from . import __version__
from .base_study import StudyReport
from .config import BornLensConfig, StudySpec
from .exceptions import BornLensException, StudyException
from .plotting import emit_plot
from .registry import StudyRegistry
from .utils import atomic_write_text, canonical_json, series_csv, sha256_file

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    report: StudyReport
    output_dir: Path
    files: List[Path] = field(default_factory=list)

    @property
    def manifest_path(self) -> Path:
        return self.output_dir / "manifest.json"


class BornLensOrchestrator:
    """
    Main coordination layer: verb -> study -> files.
    """

    def __init__(self, config: Optional[BornLensConfig] = None):
        """
        Initialize the orchestrator

        Args:
            config: Process settings (threads, output directory)
        """
        self.config = config or BornLensConfig()

    def list_studies(self) -> List[str]:
        return StudyRegistry.list_studies()

    def create_study(self, verb: str):
        study_class = StudyRegistry.get(verb)
        if study_class is None:
            raise StudyException(f"Unknown study: {verb}. Available: {', '.join(self.list_studies())}")
        return study_class(config=self.config)

    def run(self, verb: str, spec: StudySpec, output_dir: Optional[str] = None) -> RunResult:
        """
        Run one study and write every output

        Args:
            verb: Registered study verb
            spec: Validated spec for that study
            output_dir: Overrides the configured output directory

        Returns:
            RunResult with the report and the written files
        """
        study = self.create_study(verb)
        if not isinstance(spec, study.spec_class):
            raise StudyException(f"{verb} expects {study.spec_class.__name__}, got {type(spec).__name__}")
        logger.info("Running %s (seed %d)", verb, spec.master_seed)
        report = study.run(spec)
        logger.info("Finished %s: %d point(s)", verb, len(report.points))
        return self.write(report, Path(output_dir or self.config.output_dir))

    def write(self, report: StudyReport, root: Path) -> RunResult:
        """Write a report, its series, tables and plots, then the manifest"""
        base = root / report.scenario
        result = RunResult(report=report, output_dir=root)
        provenance = report.provenance()

        result.files.append(atomic_write_text(base / "report.json", canonical_json(report.to_dict(), pretty=True)))
        for stem, (times, values) in sorted(report.series.items()):
            result.files.append(atomic_write_text(base / f"{stem}.csv", series_csv(times, values)))
        for name, text in sorted(report.tables.items()):
            result.files.append(atomic_write_text(base / name, text))
        for stem, request in sorted(report.plots.items()):
            try:
                result.files.append(emit_plot(request, base / f"{stem}.svg", provenance))
            except BornLensException as e:
                logger.warning("Skipping plot %s: %s", stem, e)

        manifest = {
            "bornlens_version": __version__,
            "scenario": report.scenario,
            **provenance,
            "files": self._checksums(result.files, root),
        }
        atomic_write_text(result.manifest_path, canonical_json(manifest, pretty=True))
        logger.info("Wrote %d file(s) under %s", len(result.files) + 1, root)
        return result

    @staticmethod
    def _checksums(files: List[Path], root: Path) -> Dict[str, str]:
        return {path.relative_to(root).as_posix(): sha256_file(path) for path in sorted(files)}
