import json
import subprocess
import sys

import pytest
from helpers import op, rf, single_box_instance, u

from gaudin.cli import EXIT_FAIL, EXIT_INPUT, EXIT_OK, main

D_EX = op(1, rf([-1], u), 0)


def write(tmp_path, data, name="inst.json"):
    p = tmp_path / name
    p.write_text(data if isinstance(data, str) else json.dumps(data))
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def construct_instance(operator):
    inst = single_box_instance(2, ["0"], [1, 0])
    inst["factors"][0]["partition"] = [1, 0]
    inst["operator"] = operator.to_dict()
    return inst


def test_spectrum_one_dim(tmp_path, capsys):
    path = write(tmp_path, single_box_instance(2, ["0", "1"], [1, 1]))
    code, out, _ = run(capsys, "--instance", path, "--command", "spectrum")
    report = json.loads(out)
    assert code == EXIT_OK and len(report["eigenvectors"]) == 1
    assert [a["name"] for a in report["assertions"]][0] == "count_equals_dimension"
    assert set(report) >= {"instance", "assertions", "seeds", "precision"}


def test_spectrum_two_dim(tmp_path, capsys):
    path = write(tmp_path, single_box_instance(2, ["0", "1", "3", "-2"], [2, 2]))
    code, out, _ = run(capsys, "--instance", path, "--command", "spectrum")
    assert code == EXIT_OK and len(json.loads(out)["eigenvectors"]) == 2


def test_malformed_json(tmp_path, capsys):
    code, out, err = run(capsys, "--instance", write(tmp_path, "{nope"), "--command", "spectrum")
    assert code == EXIT_INPUT and out == "" and "malformed JSON" in err


def test_construct_success(tmp_path, capsys):
    code, out, _ = run(capsys, "--instance", write(tmp_path, construct_instance(D_EX)), "--command", "construct")
    assert code == EXIT_OK and json.loads(out)["construction"]["success"]


def test_construct_not_in_delta(tmp_path, capsys):
    bad = op(1, rf([-3], u), 0)
    code, out, _ = run(capsys, "--instance", write(tmp_path, construct_instance(bad)), "--command", "construct")
    report = json.loads(out)
    assert code == EXIT_FAIL and "membership" in report["details"]


def test_construct_missing_b(tmp_path, capsys):
    inst = construct_instance(D_EX)
    del inst["factors"][0]["b"]
    code, out, _ = run(capsys, "--instance", write(tmp_path, inst), "--command", "construct")
    assert code == EXIT_INPUT and out == ""


def test_construct_short_schedule(tmp_path, capsys):
    path = write(tmp_path, construct_instance(D_EX))
    code, out, _ = run(capsys, "--instance", path, "--command", "construct", "--eps-steps", "3")
    assert code == EXIT_FAIL and "Puiseux limit not resolved" in json.loads(out)["assertions"][0]["error"]


def test_empty_list(tmp_path, capsys):
    code, out, _ = run(capsys, "--instance", write(tmp_path, "[]"), "--command", "verify")
    assert code == EXIT_OK and json.loads(out) == {"command": "verify", "reports": []}


def test_verify_and_determinism(tmp_path, capsys):
    path = write(tmp_path, [single_box_instance(2, ["0", "1"], [1, 1], seed=2)])
    first = run(capsys, "--instance", path, "--command", "verify", "--random-points", "1")
    second = run(capsys, "--instance", path, "--command", "verify", "--random-points", "1")
    assert first[0] == EXIT_OK and first[1] == second[1]


def test_completeness_and_out(tmp_path, capsys):
    path = write(tmp_path, {"instances": [single_box_instance(3, ["0", "1", "2"], [1, 1, 1])]})
    target = tmp_path / "report.json"
    code, out, _ = run(capsys, "--instance", path, "--command", "completeness", "--out", str(target))
    assert code == EXIT_OK and out == ""
    assert json.loads(target.read_text())["reports"][0]["assertions"][0]["count"] == 1


def test_parallel_matches_serial(tmp_path, capsys):
    items = [single_box_instance(2, ["0", "1"], [1, 1]), single_box_instance(2, ["0", "1", "2"], [2, 1])]
    path = write(tmp_path, items)
    serial = run(capsys, "--instance", path, "--command", "spectrum")
    parallel = run(capsys, "--instance", path, "--command", "spectrum", "--jobs", "2")
    assert serial[1] == parallel[1]


@pytest.mark.parametrize("argv", [["--command", "spectrum"],
                                  ["--command", "selftest", "--precision", "40"],
                                  ["--command", "selftest", "--tol", "0"],
                                  ["--command", "selftest", "--eps-ratio", "3/2"]])
def test_bad_config(argv, capsys):
    assert main(argv) == EXIT_INPUT
    assert capsys.readouterr().out == ""


def test_selftest(capsys):
    code, out, _ = run(capsys, "--command", "selftest")
    assert code == EXIT_OK and all(a["pass"] for a in json.loads(out)["assertions"])


def test_env_precision(tmp_path):
    path = write(tmp_path, single_box_instance(2, ["0", "1"], [1, 1]))
    cmd = [sys.executable, "-m", "gaudin", "--instance", path, "--command", "spectrum"]
    env = {"GAUDIN_PRECISION": "128", "PATH": ""}
    res = subprocess.run(cmd, capture_output=True, text=True, env=env)
    assert res.returncode == 0 and json.loads(res.stdout)["precision"] == 128
    res = subprocess.run(cmd + ["--precision", "64"], capture_output=True, text=True, env=env)
    assert json.loads(res.stdout)["precision"] == 64
    res = subprocess.run(cmd, capture_output=True, text=True, env={"GAUDIN_PRECISION": "40"})
    assert res.returncode == 2 and res.stdout == ""
