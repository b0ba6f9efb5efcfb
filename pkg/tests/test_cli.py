"""Command-line interface: JSON IO, exit codes, report reproducibility."""

import json
from pathlib import Path

import numpy as np
import pytest

from mirror_torus.cli import main

THETA_I_0 = 1.086434811213308
THETA_2I_0 = 1.003734885487739
THETA_HALF_2I_0 = 0.415760602596027


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def case_file(tmp_path, **overrides):
    payload = {
        "schemaVersion": 1,
        "tau": {"re": 0.0, "im": 1.0},
        "objects": [
            {"type": "line_bundle", "n": 0},
            {"type": "line_bundle", "n": 1},
            {"type": "line_bundle", "n": 2},
        ],
        "morphisms": [
            {"source": 0, "target": 1, "coeffs": {"0": [[1.0]]}},
            {"source": 1, "target": 2, "coeffs": {"0": [[1.0]]}},
        ],
    }
    payload.update(overrides)
    path = tmp_path / "case.json"
    path.write_text(json.dumps(payload))
    return str(path)


def test_theta_value(capsys):
    code, out, _ = run(capsys, ["theta", "--tau", "i"])
    assert code == 0
    value = json.loads(out)["value"]
    assert abs(value["re"] - THETA_I_0) < 1e-13
    assert abs(value["im"]) < 1e-15


def test_theta_characteristic_and_j_suffix(capsys):
    code, out, _ = run(capsys, ["theta", "--cprime", "1/2", "--tau", "2j"])
    assert code == 0
    assert abs(json.loads(out)["value"]["re"] - THETA_HALF_2I_0) < 1e-13


def test_theta_derivative(capsys):
    code, out, _ = run(capsys, ["theta", "--tau", "i", "--z", "0.3", "--order", "1"])
    assert code == 0
    assert abs(json.loads(out)["value"]["re"] - (-0.5164122224961463)) < 1e-12


def test_compose_sides_match(capsys, tmp_path):
    path = case_file(tmp_path)
    code, out, _ = run(capsys, ["compose", path, "--side", "derived"])
    assert code == 0
    derived = json.loads(out)
    assert derived["kind"] == "theta"
    code, out, _ = run(capsys, ["compose", path, "--side", "fukaya"])
    assert code == 0
    fukaya = json.loads(out)
    assert fukaya["kind"] == "triangle"
    assert abs(derived["coeffs"]["0"][0][0]["re"] - THETA_2I_0) < 1e-12
    assert abs(derived["coeffs"]["1"][0][0]["re"] - THETA_HALF_2I_0) < 1e-12
    for c in ("0", "1"):
        d = derived["coeffs"][c][0][0]
        f = fukaya["coeffs"][c][0][0]
        assert abs(complex(d["re"], d["im"]) - complex(f["re"], f["im"])) < 1e-12


def test_compose_torsion_target(capsys, tmp_path):
    path = case_file(
        tmp_path,
        objects=[
            {"type": "line_bundle", "n": 0},
            {"type": "line_bundle", "n": 1},
            {"type": "torsion", "alpha": 0, "beta": 0},
        ],
    )
    code, out, _ = run(capsys, ["compose", path, "--side", "derived"])
    assert code == 0
    derived = json.loads(out)
    assert derived["kind"] == "torsion"
    assert abs(derived["coeffs"]["0"][0][0]["re"] - THETA_I_0) < 1e-12
    code, out, _ = run(capsys, ["compose", path, "--side", "fukaya"])
    assert code == 0
    fukaya = json.loads(out)
    assert fukaya["kind"] == "vertical"
    assert abs(fukaya["coeffs"]["0"][0][0]["re"] - THETA_I_0) < 1e-12


def test_verify_pass(capsys):
    code, out, _ = run(capsys, ["verify", "addition", "--count", "5", "--seed", "1"])
    assert code == 0
    assert out.startswith("addition: pass")


def test_verify_all_small(capsys):
    code, out, _ = run(capsys, ["verify", "all", "--count", "3", "--seed", "2"])
    assert code == 0
    assert len([ln for ln in out.splitlines() if ": pass" in ln]) == 8


def test_verify_forced_fail(capsys):
    code, out, _ = run(
        capsys, ["verify", "addition", "--count", "3", "--eps", "1e-20"]
    )
    assert code == 1
    assert "FAIL" in out


def test_bad_tau_exit_2(capsys):
    code, _, err = run(capsys, ["theta", "--tau", "1-1i"])
    assert code == 2
    assert "Im(tau)" in err


def test_bad_complex_exit_2(capsys):
    code, _, err = run(capsys, ["theta", "--tau", "spam"])
    assert code == 2


def test_missing_case_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, ["compose", str(tmp_path / "nope.json")])
    assert code == 2
    assert "not found" in err


def test_bad_schema_exit_2(capsys, tmp_path):
    path = case_file(tmp_path, schemaVersion=99)
    code, _, err = run(capsys, ["compose", path])
    assert code == 2
    assert "schemaVersion" in err


def test_bad_chain_indices_exit_2(capsys, tmp_path):
    path = case_file(
        tmp_path,
        morphisms=[
            {"source": 1, "target": 0, "coeffs": {"0": [[1.0]]}},
            {"source": 1, "target": 2, "coeffs": {"0": [[1.0]]}},
        ],
    )
    code, _, err = run(capsys, ["compose", path])
    assert code == 2


def test_bad_eps_env_exit_2(capsys, monkeypatch):
    monkeypatch.setenv("MIRROR_TORUS_EPS", "banana")
    code, _, err = run(capsys, ["theta", "--tau", "i"])
    assert code == 2
    assert "MIRROR_TORUS_EPS" in err


def test_eps_env_used(capsys, monkeypatch):
    monkeypatch.setenv("MIRROR_TORUS_EPS", "1e-6")
    code, out, _ = run(capsys, ["theta", "--tau", "i"])
    assert code == 0
    assert abs(json.loads(out)["value"]["re"] - THETA_I_0) < 1e-6


def test_truncation_cap_exit_3(capsys):
    code, _, err = run(capsys, ["theta", "--tau", "i", "--max-terms", "3"])
    assert code == 3
    assert "cap" in err


def test_report_reproducible(capsys, tmp_path):
    out1 = tmp_path / "r1"
    out2 = tmp_path / "r2"
    for out_dir in (out1, out2):
        code, out, _ = run(capsys, ["report", "--out", str(out_dir), "--seed", "5"])
        assert code == 0
    for name in ("report.json", "report.csv", "residuals.png", "margins.png"):
        assert (out1 / name).exists()
    doc1 = json.loads((out1 / "report.json").read_text())
    doc2 = json.loads((out2 / "report.json").read_text())
    assert doc1["schemaVersion"] == 1
    assert doc1["seed"] == 5
    assert len(doc1["suites"]) == 8
    doc1.pop("timestamp")
    doc2.pop("timestamp")
    assert doc1 == doc2
    assert (out1 / "report.csv").read_bytes() == (out2 / "report.csv").read_bytes()
    assert (out1 / "residuals.png").read_bytes() == (out2 / "residuals.png").read_bytes()
    assert (out1 / "margins.png").read_bytes() == (out2 / "margins.png").read_bytes()
