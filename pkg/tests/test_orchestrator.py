"""
Tests for BornLensOrchestrator
"""

import json

import pytest

from bornlens.base_study import StudyReport
from bornlens.config import BornLensConfig, DoubleSlitSpec, SuperpositionSpec
from bornlens.exceptions import StudyException
from bornlens.orchestrator import BornLensOrchestrator
from bornlens.plotting import Curve, PlotRequest
from bornlens.utils import sha256_file


def hand_built_report() -> StudyReport:
    return StudyReport(
        scenario="demo",
        spec={"n": 1000},
        spec_hash="f" * 64,
        master_seed=7,
        points=[{"sigma": 0.2, "tau_q": 1.5}],
        summary={"note": "ok"},
        series={"sigma=0.2/series_L1": ([0.0, 0.5], [1.0, 0.25])},
        plots={
            "sigma=0.2/distances": PlotRequest([Curve("L1", [0.0, 0.5], [1.0, 0.25])]),
            "sigma=0.2/empty": PlotRequest([]),
        },
        tables={"sigma=0.2/trajectories.csv": "trajectory_id,t,x\n0,0.0,1.0\n"},
    )


class TestBornLensOrchestrator:
    """Tests for BornLensOrchestrator"""

    def test_list_studies(self):
        """Every verb is available"""
        assert BornLensOrchestrator().list_studies() == [
            "barrier", "double-slit", "gravity", "oscillator", "superposition",
        ]

    def test_unknown_verb(self):
        """An unregistered verb is a study error"""
        with pytest.raises(StudyException, match="triple-slit"):
            BornLensOrchestrator().create_study("triple-slit")

    def test_spec_type_mismatch(self, tmp_path):
        """A spec of the wrong scenario is rejected before running"""
        with pytest.raises(StudyException, match="SuperpositionSpec"):
            BornLensOrchestrator().run("superposition", DoubleSlitSpec(), output_dir=str(tmp_path))

    def test_write_layout(self, tmp_path):
        """report.json, series, tables and plots land under the scenario directory"""
        result = BornLensOrchestrator().write(hand_built_report(), tmp_path)
        base = tmp_path / "demo"
        assert (base / "report.json").exists()
        assert (base / "sigma=0.2" / "series_L1.csv").read_text() == "t,value\n0.0,1.0\n0.5,0.25\n"
        assert (base / "sigma=0.2" / "trajectories.csv").exists()
        assert (base / "sigma=0.2" / "distances.svg").exists()
        assert result.manifest_path == tmp_path / "manifest.json"

    def test_empty_plot_is_skipped(self, tmp_path):
        """A plot without data is skipped instead of failing the run"""
        result = BornLensOrchestrator().write(hand_built_report(), tmp_path)
        assert not (tmp_path / "demo" / "sigma=0.2" / "empty.svg").exists()
        assert len(result.files) == 4

    def test_manifest(self, tmp_path):
        """The manifest lists every file with its sha256 and the provenance"""
        result = BornLensOrchestrator().write(hand_built_report(), tmp_path)
        manifest = json.loads(result.manifest_path.read_text())
        assert manifest["scenario"] == "demo"
        assert manifest["master_seed"] == 7
        assert manifest["spec_hash"] == "f" * 64
        assert "bornlens_version" in manifest
        assert set(manifest["files"]) == {p.relative_to(tmp_path).as_posix() for p in result.files}
        for rel, digest in manifest["files"].items():
            assert sha256_file(tmp_path / rel) == digest

    def test_report_json(self, tmp_path):
        """report.json holds the records but not the series"""
        BornLensOrchestrator().write(hand_built_report(), tmp_path)
        report = json.loads((tmp_path / "demo" / "report.json").read_text())
        assert report["points"] == [{"sigma": 0.2, "tau_q": 1.5}]
        assert "series" not in report

    def test_outputs_independent_of_threads(self, tmp_path):
        """Records and series are byte-identical for 1 and 3 threads"""
        spec = SuperpositionSpec(
            mix_angle_deg=[30.0], n=1000, dt=1e-3, t_end=0.05, observe_every=0.01, bins=30, control_t_end=0.02,
        )
        digests = []
        for threads in (1, 3):
            config = BornLensConfig(threads=threads, stream_block=256)
            result = BornLensOrchestrator(config).run("superposition", spec, output_dir=str(tmp_path / str(threads)))
            manifest = json.loads(result.manifest_path.read_text())
            digests.append({k: v for k, v in manifest["files"].items() if not k.endswith(".svg")})
        assert digests[0] == digests[1]
        assert "superposition/report.json" in digests[0]


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
