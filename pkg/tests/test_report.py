from fractions import Fraction

import numpy as np
import orjson
import pandas as pd

from hyperjac.experiments.report import RateExperiment, dumps, write_report


def test_dumps_is_stable():
    raw = dumps({"b": Fraction(3, 4), "a": np.float64(1.5), "c": np.arange(3)})
    assert raw.endswith(b"\n")
    assert raw.index(b'"a"') < raw.index(b'"b"')
    assert orjson.loads(raw) == {"a": 1.5, "b": "3/4", "c": [0, 1, 2]}


def test_write_report_json_and_csv(tmp_path):
    exp = RateExperiment(
        "prop45",
        {"rho": "3/4"},
        [{"k": 8, "minor_integral": 1.0, "norm": 0.5, "guard": "full box"}, {"k": 16, "minor_integral": 1.4, "norm": 0.4, "guard": "full box"}],
        verdicts={"minor_slope": True},
    )
    json_path, csv_path = write_report(exp, tmp_path / "out")
    assert json_path.name == "prop45.json"
    payload = orjson.loads(json_path.read_bytes())
    assert payload["passed"] is True
    table = pd.read_csv(csv_path)
    assert list(table.columns) == ["k", "minor_integral", "sobolev_norm", "guard"]
    assert table["k"].tolist() == [8, 16]


def test_write_report_without_rows(tmp_path):
    json_path, csv_path = write_report({"suite": "lemmas", "checks": []}, tmp_path)
    assert json_path.name == "lemmas.json"
    assert csv_path is None


def test_failed_verdict_fails_experiment():
    exp = RateExperiment("prop49", {}, [], verdicts={"minor_slope": True, "norm_slope": False})
    assert not exp.passed
    assert exp.to_dict()["passed"] is False
