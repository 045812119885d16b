import csv
import json

import numpy as np
import pytest

from substatelab.cli import run
from substatelab.qstate import DensityMatrix, PureState
from substatelab.report import CheckRow, ExperimentReport, strip_wall_time


def write_state(path, state):
    path.write_text(json.dumps(state.to_json()))
    return str(path)


def test_divergence_equal_states(tmp_path, capsys):
    f = write_state(tmp_path / "s.json", DensityMatrix(np.diag([0.75, 0.25]).astype(complex)))
    assert run(["divergence", "--rho", f, "--sigma", f]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["details"]["D"] == 0.0
    assert doc["details"]["S"] == pytest.approx(0.0, abs=1e-12)
    assert doc["details"]["trace_distance"] == pytest.approx(0.0, abs=1e-12)


def test_divergence_pure_vs_mixed(tmp_path, capsys):
    rho = write_state(tmp_path / "r.json", PureState.normalized(np.array([1.0, 1.0])))
    sigma = write_state(tmp_path / "s.json", DensityMatrix(np.diag([0.75, 0.25]).astype(complex)))
    assert run(["divergence", "--rho", rho, "--sigma", sigma]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["details"]["D"] > 0


def test_hadamard_attack_row(capsys):
    assert run(["privacy", "hadamard-attack", "--n", "8"]) == 0
    doc = json.loads(capsys.readouterr().out)
    row = next(r for r in doc["rows"] if r["check_name"] == "I")
    assert row["measured"] == pytest.approx(1.5, abs=1e-9)


@pytest.mark.parametrize("demo", ["index", "privacy-loss", "antv"])
def test_privacy_demos(demo, capsys):
    assert run(["privacy", demo]) == 0


@pytest.mark.parametrize("kind", ["classical", "pure", "full"])
def test_substate_pipelines(kind, tmp_path):
    assert run(["substate", kind, "--seed", "3", "--out", str(tmp_path)]) == 0
    [csv_path] = tmp_path.glob("*.csv")
    with csv_path.open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["check_name", "measured", "bound", "tolerance", "pass"]
    assert all(r[4] == "True" for r in rows[1:])


def test_sweep_uses_requested_trials(tmp_path):
    assert run(["sweep", "classical", "--trials", "20", "--out", str(tmp_path)]) == 0


def test_usage_errors(tmp_path, capsys):
    assert run(["bogus"]) == 2
    assert run(["divergence", "--rho", str(tmp_path / "missing.json"), "--sigma", "x"]) == 2
    assert run(["sweep", "oracle", "--tol-scale", "0"]) == 2
    assert run(["privacy", "index", "--x", "0110", "--i", "9"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["divergence", "--rho", str(bad), "--sigma", str(bad)]) == 2


def test_failure_and_shortfall_exit_codes():
    rep = ExperimentReport("x", 0)
    rep.add(CheckRow("ok", 0.0, 1.0))
    assert rep.exit_code() == 0
    rep.shortfall = True
    assert rep.exit_code() == 3
    rep.add(CheckRow("bad", 2.0, 1.0))
    assert rep.exit_code() == 1


def test_check_row_senses():
    assert CheckRow("a", 1.0, 1.0, 0.0, "==").passed
    assert not CheckRow("a", 1.1, 1.0, 0.05, "==").passed
    assert CheckRow("a", 0.95, 1.0, 0.1, ">=").passed
    with pytest.raises(ValueError):
        CheckRow("a", 0, 0, 0, "<")


def test_reports_identical_up_to_wall_time(tmp_path):
    outs = []
    for d in ("a", "b"):
        assert run(["substate", "full", "--seed", "5", "--out", str(tmp_path / d)]) == 0
        [jpath] = (tmp_path / d).glob("*.json")
        outs.append(strip_wall_time(json.loads(jpath.read_text())))
    assert outs[0] == outs[1]
