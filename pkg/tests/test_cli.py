import math

import orjson
import pytest
from typer.testing import CliRunner

from hyperjac.cli import app
from hyperjac.errors import VerificationError

runner = CliRunner()


def _matrix(tmp_path, orders, entries, scalar="rational"):
    path = tmp_path / "matrix.json"
    path.write_bytes(orjson.dumps({"orders": orders, "scalar": scalar, "entries": entries}))
    return str(path)


def test_det_of_2x2(tmp_path):
    result = runner.invoke(app, ["det", _matrix(tmp_path, [2, 2], ["1", "2", "3", "4"])])
    assert result.exit_code == 0, result.output
    assert result.stdout.strip() == "-2"


@pytest.mark.parametrize("method", ["full", "fold"])
def test_det_of_all_ones_cube(tmp_path, method):
    path = _matrix(tmp_path, [3, 3, 3], ["1"] * 27)
    result = runner.invoke(app, ["det", path, "--method", method])
    assert result.exit_code == 0, result.output
    assert result.stdout.strip() == "0"


def test_det_exit_codes(tmp_path):
    result = runner.invoke(app, ["det", _matrix(tmp_path, [2, 3], ["1"] * 6)])
    assert result.exit_code == 2
    result = runner.invoke(app, ["det", _matrix(tmp_path, [4, 4, 4], ["1"] * 64), "--budget", "10"])
    assert result.exit_code == 3


def test_minor_tracks_selection_sign(tmp_path):
    path = _matrix(tmp_path, [3, 3], ["1", "2", "3", "4", "5", "6", "7", "8", "10"])
    result = runner.invoke(app, ["minor", path, "--beta", "1,2", "--alpha", "1,2"])
    assert result.exit_code == 0, result.output
    assert result.stdout.strip() == "-3"
    result = runner.invoke(app, ["minor", path, "--beta", "2,1", "--alpha", "1,2"])
    assert result.stdout.strip() == "3"


def test_check_suite_and_unknown_suite():
    result = runner.invoke(app, ["check", "--suite", "lemmas", "--seed", "42", "--trials", "5"])
    assert result.exit_code == 0, result.output
    report = orjson.loads(result.stdout)
    assert report["passed"] and report["seed"] == 42
    assert runner.invoke(app, ["check", "--suite", "everything"]).exit_code == 2


def test_counterexample_needs_rho():
    result = runner.invoke(app, ["counterexample", "--family", "prop45", "--N", "2", "--s", "1/2", "--p", "3"])
    assert result.exit_code == 2


def test_counterexample_writes_report(tmp_path):
    out = tmp_path / "out"
    args = ["counterexample", "--family", "thm411case2", "--N", "2", "--r", "2", "--rho", "3/5"]
    args += ["--s", "1/2", "--p", "3", "--k", "8,16,32,64", "--no-norms", "--out", str(out)]
    result = runner.invoke(app, args)
    assert result.exit_code == 0, result.output
    summary = orjson.loads(result.stdout)
    assert summary["passed"]
    assert (out / "thm411case2.json").exists()


def test_sobolev_of_identity_map(tmp_path):
    path = tmp_path / "u.json"
    field = {"sum": [{"coeff": 1.0, "axes": [{"pieces": [{"terms": [{"c": 1.0, "a": 1}]}]}]}]}
    path.write_bytes(orjson.dumps(field))
    result = runner.invoke(app, ["sobolev", str(path), "--s", "1", "--p", "2"])
    assert result.exit_code == 0, result.output
    payload = orjson.loads(result.stdout)
    assert payload["norm"] == pytest.approx(math.sqrt(1 / 3) + 1, rel=1e-10)
    assert payload["fractional_part"] == 0.0


def test_ibp_check_agrees():
    result = runner.invoke(app, ["ibp-check", "--seed", "42", "--N", "2", "--m", "1"])
    assert result.exit_code == 0, result.output
    assert orjson.loads(result.stdout)["agrees"]
    assert runner.invoke(app, ["ibp-check", "--N", "2", "--r", "3"]).exit_code == 2


def test_failed_checks_exit_with_verification_code(monkeypatch):
    report = {
        "suite": "lemmas",
        "seed": 1,
        "trials": 1,
        "m": None,
        "checks": [{"name": "layer_swap", "failed": 1}],
        "passed": False,
    }
    monkeypatch.setattr("hyperjac.cli.run_lemma_suite", lambda *args: report)
    result = runner.invoke(app, ["check", "--suite", "lemmas"])
    assert result.exit_code == VerificationError.exit_code == 1
    assert orjson.loads(result.stdout)["passed"] is False
    assert "layer_swap" in result.stderr


def test_disagreeing_extension_identity_exits_1(monkeypatch):
    outcome = {"lhs": 1.0, "rhs": 2.0, "rhs_alternative_extension": 2.0, "agrees": False}
    monkeypatch.setattr("hyperjac.cli.compare_extension_identity", lambda *args: outcome)
    result = runner.invoke(app, ["ibp-check", "--seed", "3"])
    assert result.exit_code == 1
    assert "extension identity disagrees" in result.stderr
