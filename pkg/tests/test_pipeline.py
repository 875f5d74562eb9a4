import numpy as np
import pytest

from relsz.pipeline import greedy_ap_free, run_pipeline, szemeredi_sides, wraparound_audit
from relsz.sieve import candidate_positions
from relsz.zcore import has_k_ap

SMALL = {"points": 2000, "gamma": 0.2}


def _brute_audit(v, k):
    M = len(v)
    t = g = w = 0
    for x in range(M):
        for d in range(M):
            pts = [(x + i * d) % M for i in range(k)]
            if not all(v[q] for q in pts):
                continue
            if d == 0:
                t += 1
            elif all(x + i * d < M for i in range(k)) or all(x - i * (M - d) >= 0 for i in range(k)):
                g += 1
            else:
                w += 1
    return {"trivial": t, "genuine": g, "wrap": w}


def test_audit_against_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(60):
        M, k = int(rng.integers(5, 25)), int(rng.integers(3, 5))
        v = (rng.random(M) < 0.5).astype(float)
        assert wraparound_audit(v, k) == _brute_audit(v, k)


def test_greedy_is_ap_free():
    for k in (3, 4):
        B = greedy_ap_free(range(1, 200), k)
        assert not has_k_ap(B, k)
        assert all(has_k_ap(B + [x], k) for x in range(1, 200) if x not in B and x > B[0])


def test_empty_and_singleton():
    rep = run_pipeline(200, 3, SMALL, B=[])
    assert rep.ap_value == 0.0 and rep.alpha == 0.0
    n = int(candidate_positions(rep.params)[0])
    rep = run_pipeline(200, 3, SMALL, B=[n])
    assert rep.ap_value == rep.trivial_part
    assert rep.audit == {"trivial": 1, "genuine": 0, "wrap": 0}


def test_default_run_report():
    rep = run_pipeline(1000, 3, dict(SMALL, seed=3))
    js = rep.to_json()
    assert js["schema_version"] == "1"
    assert rep.ap_value >= rep.trivial_part >= 0
    assert rep.audit["genuine"] == 0 and rep.audit["wrap"] == 0
    assert rep.nontrivial_remainder == pytest.approx(0.0, abs=1e-15)
    assert js["majorant"]["mean"] == pytest.approx(1.0, abs=1e-12)
    assert js["delta_report"]["method"] == "point_sampled"
    assert js["provenance"]["M"] == rep.params.M
    assert js["bound_comparisons"]["lhs"] == rep.ap_value


def test_k4_uses_sampled_patterns():
    rep = run_pipeline(300, 4, dict(SMALL, patterns=10))
    assert rep.delta_report.method == "point_sampled_patterns"
    assert not has_k_ap(rep.B, 4)


def test_rejects_unknown_key():
    with pytest.raises(ValueError):
        run_pipeline(200, 3, {"bogus": 1})


def test_szemeredi_sides():
    s = szemeredi_sides(0.1, 2.0, 0.5, 3, 10)
    assert s["dense_term"] == pytest.approx(0.25)
    assert s["error_term"] == pytest.approx(1 / np.log(2))
    assert s["rhs"] == pytest.approx(0.25 - 1 / np.log(2))
    s = szemeredi_sides(0.1, 0.01, 2.0, 3, 10)
    assert s["rhs"] is None and s["dense_term"] is None and s["error_term"] is None
    assert len(s["notes"]) == 2
