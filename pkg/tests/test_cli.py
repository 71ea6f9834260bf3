import json

import numpy as np
import pytest

from nhqm.cli import run
from nhqm.errors import ConfigError
from nhqm.io import (
    apply_overrides,
    format_float,
    matrix_from_json,
    matrix_to_json,
    parse_config,
    require_keys,
    write_csv,
)


class TestIO:
    def test_matrix_roundtrip(self, rng):
        M = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        back = matrix_from_json(matrix_to_json(M))
        assert np.array_equal(back, M)

    def test_matrix_schema_fields(self):
        data = json.loads(matrix_to_json(np.eye(2)))
        assert data["dim"] == 2
        assert data["entries"][0] == [1.0, 0.0]
        assert len(data["entries"]) == 4

    def test_format_float_17_digits(self):
        assert format_float(np.pi) == "3.1415926535897931"

    def test_parse_config(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("""
# comment
r = 0.6
n_t = 11
flag = true
deltas = 0.1, 0.2
name = smoke
""")
        out = parse_config(cfg)
        assert out == {"r": 0.6, "n_t": 11, "flag": True,
                       "deltas": [0.1, 0.2], "name": "smoke"}

    def test_parse_config_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config(tmp_path / "nope.cfg")

    def test_overrides(self):
        merged = apply_overrides({"a": 1}, ["a=2", "b=0.5"])
        assert merged == {"a": 2, "b": 0.5}

    def test_require_keys_rejects_unknown(self):
        with pytest.raises(ConfigError):
            require_keys({"bogus": 1}, {"a": (1, int)}, "cmd")

    def test_require_keys_fills_defaults(self):
        out = require_keys({}, {"a": (3, int), "b": (0.5, float)}, "cmd")
        assert out == {"a": 3, "b": 0.5}

    def test_write_csv_metadata_and_digits(self, tmp_path):
        path = tmp_path / "t.csv"
        write_csv(path, ["x"], [{"x": 1 / 3}], {"model": "demo"})
        text = path.read_text()
        assert text.startswith("# model=demo\nx\n")
        assert "0.33333333333333331" in text


class TestCliTwoLevel:
    def test_smoke_and_determinism(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("t_max = 5.0\nn_t = 40\n")
        out = tmp_path / "tl.csv"
        code = run(["two-level", "--config", str(cfg), "--out", str(out)])
        assert code == 0
        first = out.read_bytes()
        assert out.with_suffix(".png").exists()
        code = run(["two-level", "--config", str(cfg), "--out", str(out)])
        assert code == 0
        assert out.read_bytes() == first

    def test_flat_norm_for_hermitian_params(self, tmp_path):
        out = tmp_path / "tl.csv"
        code = run(["two-level", "--out", str(out), "--no-figure",
                    "--override", "r=0.0", "--override", "theta=0.0",
                    "--override", "n_t=20"])
        assert code == 0
        lines = [l for l in out.read_text().splitlines()
                 if not l.startswith("#")][1:]
        norms = [float(l.split(",")[2]) for l in lines]
        assert max(abs(v - 1.0) for v in norms) < 1e-12

    def test_bad_config_key_exit_1(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("bogus_key = 1\n")
        assert run(["two-level", "--config", str(cfg),
                    "--out", str(tmp_path / "x.csv")]) == 1


class TestCliAncilla:
    def test_two_level_report(self, tmp_path):
        out = tmp_path / "report.json"
        code = run(["ancilla-verify", "--out", str(out), "--no-figure",
                    "--override", "n_t=25"])
        assert code == 0
        report = json.loads(out.read_text())
        assert report["max_equivalence_residual"] < 1e-10
        assert report["spectrum_doubling_residual"] < 1e-10
        assert report["subspace_invariance_residual"] < 1e-10

    def test_random_model_report(self, tmp_path):
        out = tmp_path / "report.json"
        code = run(["ancilla-verify", "--out", str(out), "--no-figure",
                    "--override", "model=random", "--override", "dim=5",
                    "--override", "n_t=15"])
        assert code == 0
        report = json.loads(out.read_text())
        assert report["max_equivalence_residual"] < 1e-9

    def test_broken_phase_exit_2(self, tmp_path):
        code = run(["ancilla-verify", "--out", str(tmp_path / "r.json"),
                    "--no-figure", "--override", "r=1.25"])
        assert code == 2

    def test_matrix_input(self, tmp_path):
        from nhqm.io import matrix_to_json
        from nhqm.models import TwoLevelParams, two_level_hamiltonian
        H = two_level_hamiltonian(TwoLevelParams(r=0.4, s=1.0))
        mpath = tmp_path / "H.json"
        mpath.write_text(matrix_to_json(H))
        out = tmp_path / "report.json"
        code = run(["ancilla-verify", "--out", str(out), "--no-figure",
                    "--override", "model=matrix",
                    "--override", f"matrix_path={mpath}",
                    "--override", "n_t=15"])
        assert code == 0
        assert json.loads(out.read_text())["max_equivalence_residual"] < 1e-10

    def test_numerical_failure_exit_3(self, monkeypatch, tmp_path):
        from nhqm import cli as climod
        from nhqm.errors import NumericalError

        def boom(config, out, threads):
            raise NumericalError("synthetic")

        monkeypatch.setattr(climod, "cmd_ancilla_verify", boom)
        assert run(["ancilla-verify", "--out", str(tmp_path / "r.json"),
                    "--no-figure"]) == 3


class TestCliRlm:
    def test_smoke(self, tmp_path):
        out = tmp_path / "rlm.csv"
        code = run(["rlm-occupancy", "--out", str(out), "--threads", "1",
                    "--override", "N=30", "--override", "n_phi=3",
                    "--override", "phi_min=0.3", "--override", "phi_max=1.3"])
        assert code == 0
        text = out.read_text()
        assert "policy,phi,occ_hermitian" in text
        assert out.with_suffix(".png").exists()


class TestCliCritical:
    def test_smoke_small(self, tmp_path):
        out = tmp_path / "crit.csv"
        code = run(["critical-scan", "--out", str(out), "--threads", "1",
                    "--override", "N=2002", "--override", "delta_s=1e-6",
                    "--override", "m_max=50",
                    "--override", "convergence_delta_s=1e-3,1e-4",
                    "--override", "convergence_N0=202"])
        assert code == 0
        assert out.with_suffix(".png").exists()
        conv = out.with_name(out.stem + "_convergence.csv")
        assert conv.exists()
        lines = [l for l in conv.read_text().splitlines()
                 if not l.startswith("#")]
        assert lines[0].startswith("delta_s,")
        assert len(lines) == 3
