import csv
import json
import subprocess
import sys

import pytest

from blasim import RunConfig
from blasim.cli import CSV_HEADER, main


def write(path, obj):
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


def test_run_passes(tmp_path, capsys):
    cfg = write(tmp_path / "c.json", RunConfig.make(7, "logf", t=2, adversary="lie_label", seed=1).to_dict())
    out = tmp_path / "r.json"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["all_pass"] is True and rep["sub_rounds"] == 7
    assert "pass:" in capsys.readouterr().out


def test_run_quiet_prints_nothing(tmp_path, capsys):
    cfg = write(tmp_path / "c.json", RunConfig.make(4, "sqrtf").to_dict())
    assert main(["run", "--quiet", "--config", cfg, "--out", str(tmp_path / "r.json")]) == 0
    assert capsys.readouterr().out == ""


def test_run_failure_exits_one_and_names_the_witness(tmp_path, capsys):
    cfg = write(tmp_path / "c.json", RunConfig.make(4, "sqrtf").to_dict())
    out = tmp_path / "r.json"
    assert main(["run", "--invert-verdicts", "--config", cfg, "--out", str(out)]) == 1
    assert str(out) in capsys.readouterr().err
    assert json.loads(out.read_text())["all_pass"] is False


@pytest.mark.parametrize("content", [
    "{", "[]", {"n": 4},
    {"n": 3, "f": 1, "algorithm": "sqrtf", "inputs": ["{0:0}", "{1:0}", "{2:0}"]},
    {"n": 4, "f": 1, "algorithm": "sqrtf", "inputs": ["{0:0}"] * 4, "adversary": "nope"},
])
def test_run_config_errors_exit_two(tmp_path, content):
    cfg = write(tmp_path / "c.json", content)
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "r.json")]) == 2


def test_missing_file_and_bad_arguments_exit_two(tmp_path):
    assert main(["run", "--config", str(tmp_path / "none.json"), "--out", str(tmp_path / "r")]) == 2
    assert main(["run"]) == 2
    assert main(["dance"]) == 2


def test_sweep_writes_summary_and_reports(tmp_path):
    spec = write(tmp_path / "s.json", {"n": [4, 16], "algorithm": ["logn"], "adversary": ["silent"],
                                       "seeds": 2})
    out = tmp_path / "out"
    assert main(["sweep", "--quiet", "--spec", spec, "--out-dir", str(out)]) == 0
    rows = list(csv.reader(open(out / "summary.csv")))
    assert rows[0] == CSV_HEADER == ["n", "f", "t", "algorithm", "adversary", "seed", "sub_rounds",
                                     "envelopes", "all_pass"]
    assert [(r[0], r[6], r[8]) for r in rows[1:]] == [
        ("4", "9", "true"), ("4", "9", "true"), ("16", "15", "true"), ("16", "15", "true")]
    assert len(list((out / "reports").glob("*.json"))) == 4


def test_sweep_t_rules(tmp_path):
    spec = write(tmp_path / "s.json", {"n": 10, "algorithm": "sqrtf", "adversary": "terrible",
                                       "seeds": [0, 1, 2], "t": ["f", "below_f", 1]})
    out = tmp_path / "out"
    assert main(["sweep", "--quiet", "--spec", spec, "--out-dir", str(out)]) == 0
    ts = [r["t"] for r in csv.DictReader(open(out / "summary.csv"))]
    assert ts == ["3", "3", "3", "0", "1", "2", "1", "1", "1"]


@pytest.mark.parametrize("content", ["{}", "nope", {"n": 4}, {"n": 4, "algorithm": "raft"},
                                     {"n": 4, "algorithm": "sqrtf", "seeds": []},
                                     {"n": 4, "algorithm": "sqrtf", "colour": 1}])
def test_sweep_bad_spec_exits_two(tmp_path, content):
    spec = write(tmp_path / "s.json", content)
    assert main(["sweep", "--spec", spec, "--out-dir", str(tmp_path / "o")]) == 2


def test_sweep_fail_fast_stops_at_first_failure(tmp_path):
    spec = write(tmp_path / "s.json", {"n": 4, "algorithm": "sqrtf", "adversary": "silent", "seeds": 5})
    out = tmp_path / "o"
    assert main(["sweep", "--quiet", "--fail-fast", "--invert-verdicts", "--spec", spec,
                 "--out-dir", str(out)]) == 1
    assert len(list(csv.reader(open(out / "summary.csv")))) == 2


def test_module_entry_point(tmp_path):
    cfg = write(tmp_path / "c.json", RunConfig.make(4, "logn").to_dict())
    res = subprocess.run([sys.executable, "-m", "blasim", "run", "--config", cfg, "--out",
                          str(tmp_path / "r.json")], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
