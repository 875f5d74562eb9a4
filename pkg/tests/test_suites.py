import json

import numpy as np
import pytest

from relsz import suites
from relsz.suites import SCOPES, SuiteFailure, emit_inequality_suite, run_instance, seeded_nu
from relsz.zcore import DensityFunction


def test_corB_with_unit_weight_has_zero_slack():
    summ = emit_inequality_suite("corB", [0], [5], nu=DensityFunction.constant(5))
    assert summ.failed == 0
    for row in summ.rows:
        assert row["lhs"] == pytest.approx(0.0, abs=1e-12)
        assert row["rhs"] == pytest.approx(0.0, abs=1e-12)
        assert row["slack"] == pytest.approx(0.0, abs=1e-12)


def test_propD_dense_hundred_seeds():
    summ = emit_inequality_suite("propD_dense", 100, (3, 4, 5, 6, 7, 8))
    assert summ.passed == len(summ.rows) == 100


@pytest.mark.parametrize("scope", SCOPES)
def test_every_scope_passes_one_seed(scope):
    summ = emit_inequality_suite(scope, [11])
    assert summ.failed == 0 and summ.rows
    for row in summ.rows:
        assert {"scope", "seed", "N", "tag", "lhs", "rhs", "slack", "pass"} <= set(row)
        assert isinstance(row["tag"], str) and row["tag"]
        json.dumps(row)


def test_lemC_covers_all_choices():
    rows, _ = run_instance("lemC", 3, 5)
    assert sorted(r["h_choice"] for r in rows) == list(range(16))
    assert all(r["pass"] and r["chain_ok"] for r in rows)


def test_failure_serialises_instance_for_replay(monkeypatch):
    monkeypatch.setattr(suites, "strong_lfc_bound", lambda delta, k: -1.0)
    with pytest.raises(SuiteFailure) as info:
        emit_inequality_suite("lemC", [4, 5])
    exc = info.value
    assert exc.instance["seed"] == 4 and exc.instance["scope"] == "lemC"
    assert exc.row["pass"] is False and exc.row["slack"] < 0
    json.dumps(exc.instance)
    nu = np.array(exc.instance["nu"]["slices"][0])
    rows, inst = run_instance("lemC", 4, exc.instance["N"])
    assert np.array_equal(np.array(inst["nu"]["slices"][0]), nu)


def test_no_abort_collects_failures(monkeypatch):
    monkeypatch.setattr(suites, "strong_lfc_bound", lambda delta, k: -1.0)
    summ = emit_inequality_suite("lemC", [0], abort=False)
    assert summ.failed == 16


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        emit_inequality_suite("nope", 1)
    with pytest.raises(ValueError):
        emit_inequality_suite("lemB", 1, k=4)


def test_seeded_nu_mean_one():
    for seed in range(20):
        nu = seeded_nu(7, seed)
        assert nu.values.mean() == pytest.approx(1.0, abs=1e-12)
        assert nu.values.min() >= 0
