"""
End-to-end tests of the four subcommands on small grids.
"""

import json

import pytest
from typer.testing import CliRunner

from handlers.common import exit_code_for
from main import app
from services.errors import AuditError, ConfigError, FitError, PicardNonConvergence, StabilityError, SuiteError

runner = CliRunner()

SMALL = """
grid.Nx = 16
grid.Nv = 32
quadrature.eps = 0.001
quadrature.panels = 8
quadrature.order = 6
quadrature.hermite_order = 24
solver.deltas = [0.01, 0.001]
"""


def _config(tmp_path, extra: str = "", name: str = "run.cfg"):
    path = tmp_path / name
    path.write_text(SMALL + extra, encoding="utf-8")
    return path


def _invoke(*args: str):
    return runner.invoke(app, [str(arg) for arg in args])


class TestConfigErrors:
    def test_malformed_config_writes_nothing(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("grid.Nx 16\n", encoding="utf-8")
        out = tmp_path / "out"
        result = _invoke("kolmogorov", "--config", path, "--out", out)
        assert result.exit_code == 2
        assert not out.exists()

    def test_invalid_value(self, tmp_path):
        out = tmp_path / "out"
        result = _invoke("simulate", "--config", _config(tmp_path, "cross_section.s = 1.5\n"), "--out", out)
        assert result.exit_code == 2
        assert not out.exists()

    def test_empty_suite_selector(self, tmp_path):
        out = tmp_path / "out"
        result = _invoke("verify", "--suite", ",", "--config", _config(tmp_path), "--out", out)
        assert result.exit_code == 2
        assert not out.exists()

    def test_unknown_suite(self, tmp_path):
        result = _invoke("verify", "--suite", "bd,nope", "--out", tmp_path / "out")
        assert result.exit_code == 2

    def test_missing_snapshot_directory(self, tmp_path):
        result = _invoke("fit", "--snapshots", tmp_path / "none", "--out", tmp_path / "out")
        assert result.exit_code == 2

    def test_fit_requires_snapshots(self, tmp_path):
        result = _invoke("fit", "--out", tmp_path / "out")
        assert result.exit_code != 0


class TestVerify:
    def test_passing_lemmas(self, tmp_path):
        config = _config(tmp_path, "verify.bd_samples = 1000\nverify.lemma_samples = 1000\n")
        out = tmp_path / "verify"
        result = _invoke("verify", "--suite", "bd,subadd", "--config", config, "--out", out, "--seed", 3)
        assert result.exit_code == 0, result.output
        payload = json.loads((out / "verify.json").read_text(encoding="utf-8"))
        assert payload["suites"] == ["bd", "subadd"]
        assert all(item["pass"] for item in payload["results"])
        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["exit_code"] == 0
        assert manifest["seeds"]["run"] == 3
        assert "verify.json" in manifest["outputs"]
        assert str(config) in manifest["inputs"]

    def test_failed_check_exits_one(self, tmp_path):
        extra = (
            'verify.grids = [{"Nx": 8, "Nv": 32}, {"Nx": 8, "Nv": 64}]\n'
            "verify.quadrature = {\"eps\": 0.001, \"panels\": 8, \"order\": 6, \"hermite_order\": 24}\n"
            "verify.corpus_size = 2\n"
            "verify.drift_tol = 1e-12\n"
        )
        out = tmp_path / "verify"
        result = _invoke("verify", "--suite", "coercivity", "--config", _config(tmp_path, extra), "--out", out)
        assert result.exit_code == 1
        payload = json.loads((out / "verify.json").read_text(encoding="utf-8"))
        assert payload["results"][0]["pass"] is False
        assert json.loads((out / "manifest.json").read_text(encoding="utf-8"))["exit_code"] == 1


class TestKolmogorov:
    def test_zero_amplitude(self, tmp_path):
        out = tmp_path / "zero"
        result = _invoke("kolmogorov", "--config", _config(tmp_path, "initial.amplitude = 0\n"), "--out", out)
        assert result.exit_code == 0, result.output
        fits = json.loads((out / "fits.json").read_text(encoding="utf-8"))
        assert fits["x"] is None and fits["note"] == "zero initial data"
        assert json.loads((out / "audit.json").read_text(encoding="utf-8"))["pass"] is True

    def test_point_datum_run_is_deterministic(self, tmp_path):
        config = _config(tmp_path, "kolmogorov.audit = false\n")
        first, second = tmp_path / "a", tmp_path / "b"
        assert _invoke("kolmogorov", "--config", config, "--out", first).exit_code == 0
        assert _invoke("kolmogorov", "--config", config, "--out", second).exit_code == 0
        assert (first / "norms.csv").read_bytes() == (second / "norms.csv").read_bytes()
        assert (first / "fits.json").read_bytes() == (second / "fits.json").read_bytes()
        assert len(list((first / "snapshots").glob("*.kacf"))) == 7
        header = (first / "norms.csv").read_text(encoding="utf-8").splitlines()[0]
        assert header.startswith("t,h_r_l2,triple_r0,weighted_m_delta_0.01,weighted_m_delta_0.001")
        fits = json.loads((first / "fits.json").read_text(encoding="utf-8"))
        assert fits["v"]["exponent_estimate"] == pytest.approx(1.0, abs=0.15)

    def test_fit_from_snapshots(self, tmp_path):
        config = _config(tmp_path, "kolmogorov.audit = false\n")
        run_dir = tmp_path / "run"
        assert _invoke("kolmogorov", "--config", config, "--out", run_dir).exit_code == 0
        out = tmp_path / "fit"
        result = _invoke("fit", "--snapshots", run_dir / "snapshots", "--config", config, "--out", out)
        assert result.exit_code == 0, result.output
        fits = json.loads((out / "fits.json").read_text(encoding="utf-8"))
        assert set(fits) == {"x", "v", "velocity-decay"}
        assert fits["v"]["direction"] == "v"
        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        assert len(manifest["inputs"]) == 8


class TestSimulate:
    def test_zero_perturbation(self, tmp_path):
        extra = "grid.Nx = 8\nsolver.eps0 = 0\nsolver.T = 0.05\nsolver.dt = 0.01\n"
        path = tmp_path / "sim.cfg"
        path.write_text(SMALL.replace("grid.Nx = 16\n", "") + extra, encoding="utf-8")
        out = tmp_path / "sim"
        result = _invoke("simulate", "--config", path, "--out", out)
        assert result.exit_code == 0, result.output
        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        assert report["iterations"] == 1
        assert report["c0_selected"] is True
        assert report["delta_spread"] == 0.0
        audits = json.loads((out / "audit.json").read_text(encoding="utf-8"))
        assert set(audits) == {"M", "G", "kolmogorov"}
        assert audits["kolmogorov"]["residual"] <= 1e-6
        assert audits["kolmogorov"]["pass"]
        assert len(list((out / "snapshots").glob("*.kacf"))) == 6


class TestExitCodes:
    @pytest.mark.parametrize(
        "error, code",
        [
            (ConfigError("bad"), 2),
            (SuiteError("empty"), 2),
            (StabilityError("dt", step=3), 3),
            (FitError("modes"), 3),
            (AuditError("spacing"), 3),
            (PicardNonConvergence("stalled", last_deltas=(1e-3, 1e-3)), 4),
        ],
    )
    def test_mapping(self, error, code):
        assert exit_code_for(error) == code
