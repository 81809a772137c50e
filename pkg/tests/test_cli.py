import json
import os

import numpy as np
import pytest

from dilres.cli import (EXIT_CHECK_FAILURE, EXIT_CONFIG_ERROR,
                        EXIT_NUMERICAL_ABORT, EXIT_OK, main)

TOY_SPECTRUM = """
[model]
builtin = "toy2"
gap = 1.0
mu = 1.0

[grid]
n_radial = 2
r_max = 3.0
group = "inversion-only"
Lambda = 1.0

[fock]
max_total = 1

[params]
kappa = 0.0
theta_im = 0.0
g = 0.0
"""

SCAN_KAPPA = """
[model]
builtin = "spinhalf"
gap = 1.0
mu = 0.8

[grid]
n_radial = 2
r_max = 3.0

[fock]
max_total = 1

[scan]
kind = "kappa"
level = 0
kappa_max = 0.2
n_points = 4
g = 1.0
"""

VERIFY_FAST = """
[verify]
suites = ["fine_structure", "resolvent"]
"""


def run_cli(tmp_path, name, config_text, command, seed=0, subdir="out"):
    cfg = tmp_path / f"{name}.toml"
    cfg.write_text(config_text)
    out = tmp_path / subdir
    code = main([command, "--config", str(cfg), "--out", str(out),
                 "--seed", str(seed)])
    return code, out


class TestSpectrum:
    def test_decoupled_spectrum_matches_tensor_sum(self, tmp_path):
        code, out = run_cli(tmp_path, "spec", TOY_SPECTRUM, "spectrum")
        assert code == EXIT_OK
        lines = (out / "spectrum.csv").read_text().strip().splitlines()
        assert lines[0] == "index,E_re,E_im,residual,cluster,multiplicity"
        energies = sorted(float(l.split(",")[1]) for l in lines[1:])
        manifest = json.loads((out / "manifest.json").read_text())
        levels = manifest["model_levels"]
        grid_omegas = []  # tensor sum check against reported field energies
        assert len(energies) == manifest["hamiltonian"]["fock_dim"] * 2
        assert abs(energies[0] - levels[0]) < 1e-12

    def test_missing_model_file(self, tmp_path, capsys):
        cfg = tmp_path / "bad.toml"
        cfg.write_text('[model]\nfile = "no-such-model.json"\n')
        code = main(["spectrum", "--config", str(cfg), "--out",
                     str(tmp_path / "o")])
        assert code == EXIT_CONFIG_ERROR
        assert capsys.readouterr().err.strip() == "model: file not found"

    def test_missing_config(self, tmp_path, capsys):
        code = main(["spectrum", "--config", str(tmp_path / "nope.toml"),
                     "--out", str(tmp_path / "o")])
        assert code == EXIT_CONFIG_ERROR
        assert capsys.readouterr().err.strip() == "config: file not found"

    def test_theta_outside_strip_rejected(self, tmp_path):
        bad = TOY_SPECTRUM.replace("theta_im = 0.0", "theta_im = 0.8")
        code, _ = run_cli(tmp_path, "strip", bad, "spectrum")
        assert code == EXIT_CONFIG_ERROR

    def test_determinism_byte_identical(self, tmp_path):
        _, out1 = run_cli(tmp_path, "d1", TOY_SPECTRUM, "spectrum", seed=7,
                          subdir="out1")
        _, out2 = run_cli(tmp_path, "d2", TOY_SPECTRUM, "spectrum", seed=7,
                          subdir="out2")
        assert (out1 / "spectrum.csv").read_bytes() == \
            (out2 / "spectrum.csv").read_bytes()
        assert (out1 / "manifest.json").read_bytes() == \
            (out2 / "manifest.json").read_bytes()


class TestScan:
    def test_kappa_scan_writes_trajectory(self, tmp_path):
        code, out = run_cli(tmp_path, "scan", SCAN_KAPPA, "scan")
        assert code == EXIT_OK
        lines = (out / "trajectory.csv").read_text().strip().splitlines()
        assert lines[0] == ("kappa_re,kappa_im,theta_re,theta_im,"
                            "E_re,E_im,cluster_spread,residual")
        assert len(lines) == 1 + 4
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["aborted"] is False
        assert manifest["cluster_split_detected"] is False

    def test_single_point_path(self, tmp_path):
        cfg = SCAN_KAPPA.replace("n_points = 4", "n_points = 1")
        code, out = run_cli(tmp_path, "scan1", cfg, "scan")
        assert code == EXIT_OK
        lines = (out / "trajectory.csv").read_text().strip().splitlines()
        assert len(lines) == 2

    def test_negative_control_records_split(self, tmp_path):
        cfg = SCAN_KAPPA + "perturbation = 1e-3\n"
        code, out = run_cli(tmp_path, "scanb", cfg, "scan")
        assert code == EXIT_OK
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["cluster_split_detected"] is True
        assert manifest["max_cluster_spread"] > 1e-5

    def test_theta_scan_deviation_file(self, tmp_path):
        cfg = """
[model]
builtin = "toy2"

[grid]
r_max = 3.0

[scan]
kind = "theta"
level = 1
kappa = 0.1
thetas_im = [0.3, 0.5]
n_radials = [2, 4]
"""
        code, out = run_cli(tmp_path, "scant", cfg, "scan")
        assert code == EXIT_OK
        lines = (out / "theta_deviation.csv").read_text().strip().splitlines()
        assert lines[0] == "n_radial,deviation,E_re_mean,E_im_mean"
        assert len(lines) == 3
        devs = [float(l.split(",")[1]) for l in lines[1:]]
        assert devs[0] > devs[1]


class TestVerify:
    def test_fast_suites_pass(self, tmp_path):
        code, out = run_cli(tmp_path, "ver", VERIFY_FAST, "verify")
        assert code == EXIT_OK
        doc = json.loads((out / "verify.json").read_text())
        assert doc["all_pass"] is True
        assert all(c["passed"] for c in doc["checks"])
        audit = doc["resolvent_audit"]
        for case in ("ground", "excited"):
            assert audit[case]["all_passed"]
            for rec in audit[case]["records"]:
                assert rec["measured"] <= rec["bound"]
        levels = (out / "levels.csv").read_text().strip().splitlines()
        assert levels[0] == "energy,multiplicity,l,j"
        assert len(levels) == 4

    def test_tightened_tolerance_fails(self, tmp_path):
        cfg = VERIFY_FAST + "tolerance = 1e-16\n"
        code, out = run_cli(tmp_path, "vtight", cfg, "verify")
        assert code == EXIT_CHECK_FAILURE
        doc = json.loads((out / "verify.json").read_text())
        assert doc["all_pass"] is False
        assert doc["n_failed"] >= 1

    def test_unknown_suite_recorded_as_failure(self, tmp_path):
        cfg = '[verify]\nsuites = ["fine_structure", "resolvent"]\n'
        code, out = run_cli(tmp_path, "vok", cfg, "verify")
        assert code == EXIT_OK

    def test_determinism_byte_identical(self, tmp_path):
        _, out1 = run_cli(tmp_path, "v1", VERIFY_FAST, "verify", seed=3,
                          subdir="o1")
        _, out2 = run_cli(tmp_path, "v2", VERIFY_FAST, "verify", seed=3,
                          subdir="o2")
        for name in ("verify.json", "manifest.json", "levels.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


class TestFileModel:
    def test_spectrum_from_model_json(self, tmp_path):
        from dilres.atom import model_to_json, toy_spin_half
        model_path = tmp_path / "model.json"
        model_path.write_text(model_to_json(toy_spin_half(gap=1.2, mu=0.5)))
        cfg = f"""
[model]
file = "{model_path}"

[grid]
n_radial = 2
r_max = 3.0

[fock]
max_total = 1

[params]
kappa = 0.1
g = 1.0
"""
        code, out = run_cli(tmp_path, "filemodel", cfg, "spectrum")
        assert code == EXIT_OK
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["model_levels"] == [0.0, 1.2]

    def test_verify_rejects_unknown_suite(self, tmp_path, capsys):
        cfg = '[verify]\nsuites = ["bogus"]\n'
        code, _ = run_cli(tmp_path, "badsuite", cfg, "verify")
        assert code == EXIT_CONFIG_ERROR
        assert "unknown suite" in capsys.readouterr().err


def test_fine_structure_resonance_scan(tmp_path):
    cfg = """
[model]
builtin = "hydrogen-fine-structure"
Z = 1.0
beta = 1e-3
epsilon = 0.1

[grid]
n_radial = 1
r_max = 2.5
group = "octahedral"
Lambda = 1.0

[fock]
max_total = 1

[scan]
kind = "kappa"
level = 0
kappa_max = 0.2
n_points = 5
g = 1.0
"""
    code, out = run_cli(tmp_path, "fsscan", cfg, "scan")
    assert code == EXIT_OK
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["aborted"] is False
    # the (l=1, j=1/2) doublet stays Kramers-degenerate along the path
    assert manifest["cluster_split_detected"] is False
    lines = (out / "trajectory.csv").read_text().strip().splitlines()
    assert len(lines) == 6
    spreads = [float(l.split(",")[6]) for l in lines[1:]]
    assert max(spreads) < 1e-10
