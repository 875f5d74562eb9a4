import json
import subprocess
import sys

import pytest

from relsz.cli import atomic_write, canonical_json, main, resolve_config


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _strip_time(text):
    doc = json.loads(text)
    doc.pop("timestamp")
    return doc


def test_extremal_csv_row(capsys):
    code, out, _ = _run(capsys, "extremal", "N=9", "k=3", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "N,k,r,alpha,witness"
    assert lines[-1].startswith("9,3,5,")


def test_lfc_unit_weight(capsys):
    code, out, _ = _run(capsys, "lfc", "N=5", "k=3", "nu=ones")
    rep = json.loads(out)["report"]
    assert code == 0 and rep["delta"] == 0.0 and rep["method"] == "exhaustive"


def test_oracle_lfc_dual_path(capsys):
    code, out, _ = _run(capsys, "oracle", "target=lfc", "k=3", "N=5", "--seed", "7")
    rep = json.loads(out)["report"]
    assert code == 0 and rep["agree"]
    assert rep["contracted"] == pytest.approx(rep["nested_loop"], rel=1e-9)


@pytest.mark.parametrize("target", ["ap", "rk", "cut", "gowers"])
def test_oracle_targets_agree(capsys, target):
    code, out, _ = _run(capsys, "oracle", f"target={target}", "N=4", "--seed", "3")
    assert code == 0 and json.loads(out)["report"]["agree"]


def test_unknown_key_is_usage_error(capsys):
    code, out, err = _run(capsys, "lfc", "bogus=1")
    assert code == 1 and out == ""
    assert json.loads(err)["error"] == "usage"
    code, _, err = _run(capsys, "lfc", "--nope")
    assert code == 1


def test_budget_exit_code(capsys):
    code, _, err = _run(capsys, "extremal", "N=70", "k=3", "--budget-ms", "50")
    assert code == 2 and json.loads(err)["error"] == "budget"


def test_report_embeds_config_and_writes_atomically(tmp_path, capsys):
    out = tmp_path / "sub" / "r.json"
    code, text, _ = _run(capsys, "sieve", "N=3000", "--seed", "5", "--out", str(out))
    assert code == 0 and text == ""
    doc = json.loads(out.read_text())
    assert doc["config"]["seed"] == 5 and doc["config"]["params"]["N"] == 3000
    assert doc["report"]["majorant"]["mean"] == pytest.approx(1.0, abs=1e-12)
    assert sorted(p.name for p in out.parent.iterdir()) == ["r.json"]


def test_config_file(tmp_path, capsys):
    ini = tmp_path / "c.ini"
    ini.write_text("[run]\nseed = 9\n\n[params]\nN = 4\nnu = random\n")
    cfg = resolve_config(["lfc", "--config", str(ini), "k=3"])
    assert cfg["seed"] == 9 and cfg["params"]["N"] == 4 and cfg["params"]["nu"] == "random"
    cfg = resolve_config(["lfc", "--config", str(ini), "N=5", "--seed", "2"])
    assert cfg["seed"] == 2 and cfg["params"]["N"] == 5
    ini.write_text("[params]\nbogus = 1\n")
    assert _run(capsys, "lfc", "--config", str(ini))[0] == 1
    ini.write_text("[other]\nN = 1\n")
    assert _run(capsys, "lfc", "--config", str(ini))[0] == 1


@pytest.mark.parametrize("argv", [
    ["lfc", "N=4"],
    ["norms", "N=5", "r=2"],
    ["counting", "N=4"],
    ["counting", "N=6", "mode=dense_model"],
    ["pipeline", "N=400", "gamma=0.2", "points=2000"],
    ["suite", "scope=propD_dense", "seeds=5"],
])
def test_rerun_is_byte_identical(capsys, argv):
    code, first, _ = _run(capsys, *argv, "--seed", "13")
    assert code == 0
    doc = json.loads(first)
    replay = [doc["config"]["command"]] + [f"{k}={v}" for k, v in doc["config"]["params"].items()
                                           if v is not None and not isinstance(v, list)]
    code, second, _ = _run(capsys, *replay, "--seed", str(doc["config"]["seed"]))
    assert code == 0
    assert canonical_json(_strip_time(first)) == canonical_json(_strip_time(second))


def test_suite_csv_and_failure_exit(capsys, monkeypatch):
    code, out, _ = _run(capsys, "suite", "scope=propD_dense", "seeds=3", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "scope,seed,N,tag,lhs,rhs,slack,pass"
    from relsz import suites
    monkeypatch.setattr(suites, "REL_TOL", -2.0)
    code, out, err = _run(capsys, "suite", "scope=propD_dense", "seeds=3")
    assert code == 3
    doc = json.loads(out)
    assert doc["status"] == "fail" and "instance" in doc["report"]


def test_atomic_write_replaces(tmp_path):
    p = tmp_path / "x.txt"
    atomic_write(p, "one")
    atomic_write(p, "two")
    assert p.read_text() == "two" and len(list(tmp_path.iterdir())) == 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "relsz", "lfc", "N=3", "nu=ones"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["report"]["delta"] == 0.0
