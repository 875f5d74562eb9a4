"""Acceptance criteria, one test and one PASS/FAIL line each.

Run ``pytest tests/test_acceptance.py -v`` (the lines appear in the
terminal summary) or ``python tests/test_acceptance.py``.
"""

import math
import sys
import time

import numpy as np

from relsz.counting import dense_model_greedy, dense_model_verify
from relsz.hypergraph import WeightedHypergraph, clique_density
from relsz.oracles import ap_count_enumerate, lfc_value_loops, lfc_values_grid_all, rk_enumerate
from relsz.pipeline import run_pipeline
from relsz.pseudo import LfcPattern, lfc_value_arithmetic, lfc_values_all
from relsz.suites import emit_inequality_suite, seeded_nu
from relsz.zcore import ap_count, has_k_ap, rk_table

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []

REL = 1e-9


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _record(num, title, ok, detail, t0):
    line = f"[{'PASS' if ok else 'FAIL'}] {num:>2} {title}: {detail} ({time.perf_counter() - t0:.1f} s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def _suite(num, title, scope, seeds, sizes=None):
    t0 = time.perf_counter()
    summ = emit_inequality_suite(scope, seeds, sizes, abort=False)
    n_inst = len({r["seed"] for r in summ.rows})
    ok = summ.failed == 0 and n_inst >= seeds
    return _record(num, title, ok, f"{n_inst} seeds, {len(summ.rows)} rows, {summ.failed} failures, "
                   f"min slack {summ.min_slack:.3g}", t0)


def test_c01_lfc_oracle_equivalence():
    t0 = time.perf_counter()
    worst, checked = 0.0, 0
    for N in range(1, 8):
        for seed in range(50):
            nu = seeded_nu(N, seed)
            rng = np.random.default_rng([seed, N])
            p = (1 << 12) - 1 if seed == 0 else int(rng.integers(1, 1 << 12))
            pat = LfcPattern.from_int(3, p)
            a = lfc_value_arithmetic(nu, 3, pat)
            b = lfc_value_loops(nu.values, 3, pat.exponents)
            worst = max(worst, _rel(a, b))
            checked += 1
    worst_all = 0.0
    for seed in range(50):
        nu = seeded_nu(5, seed)
        a = lfc_values_all(nu, 3)
        b = lfc_values_grid_all(nu.values, 3)
        worst_all = max(worst_all, float((np.abs(a - b) / np.maximum(np.abs(b), 1e-300)).max()))
    ok = worst <= REL and worst_all <= REL
    assert _record(1, "contracted LFC == nested-loop / grid oracle", ok,
                   f"{checked} (N, nu) pairs N<=7 worst rel {worst:.2e}; 50 nu x 4096 patterns at N=5 "
                   f"worst rel {worst_all:.2e}", t0)


def test_c02_mixed_assignment_suite():
    assert _suite(2, "|S| <= 2^K delta over all mixed assignments", "lemB", 20, (5,))


def test_c03_uniformity_suite():
    assert _suite(3, "cut(nu-1) <= U(nu-1) <= 2 delta^(1/4)", "corB", 50, (3, 4, 5))


def test_c04_strong_lfc_suite():
    assert _suite(4, "strong LFC bound over 16 h-choices", "lemC", 20, (5,))


def test_c05_dense_counting_suite():
    assert _suite(5, "dense counting gap <= k eps", "propD_dense", 100, (3, 4, 5, 6, 7, 8))


def test_c06_capping_and_variance_identities():
    t0 = time.perf_counter()
    cap = emit_inequality_suite("eqD_capnu", 20, (5,), abort=False)
    var = emit_inequality_suite("eqD_varnu", 20, (5,), abort=False)
    ok = cap.failed == 0 and var.failed == 0
    assert _record(6, "capping entrywise and E(nu'-1)^2 <= 3 delta", ok,
                   f"cap {len(cap.rows)} rows {cap.failed} failures; var {len(var.rows)} rows "
                   f"{var.failed} failures, min slack {var.min_slack:.3g}", t0)


def test_c07_extremal_ground_truth():
    t0 = time.perf_counter()
    bad = []
    for k, N in ((3, 20), (4, 14)):
        recs = rk_table(N, k)
        truth = rk_enumerate(N, k)
        for rec, want in zip(recs, truth):
            w = list(rec.witness)
            if rec.r_value != want or len(w) != want or has_k_ap(w, k) or not all(1 <= x <= rec.N for x in w):
                bad.append((k, rec.N))
    ok = not bad
    assert _record(7, "r_3(N<=20), r_4(N<=14) vs subset enumeration", ok,
                   f"mismatches {bad}; r_3(20)={rk_table(20, 3)[-1].r_value} r_4(14)={rk_table(14, 4)[-1].r_value}", t0)


def test_c08_arithmetic_hypergraph_correspondence():
    t0 = time.perf_counter()
    worst, n = 0.0, 0
    for N in range(1, 12):
        for seed in range(50):
            v = np.random.default_rng([seed, N, 8]).random(N) * 2
            a = clique_density(WeightedHypergraph.from_arithmetic(v, 3))
            b = ap_count(v, 3)
            c = ap_count_enumerate(v, 3)
            worst = max(worst, _rel(a, b), _rel(a, c))
            n += 1
    ok = worst <= REL
    assert _record(8, "clique density == ap_count", ok, f"{n} functions N<=11, worst rel {worst:.2e}", t0)


PIPE_SIZES = (2000, 4000, 8000, 16000)
PIPE_SEEDS = range(5)


def test_c09_pipeline_sanity():
    t0 = time.perf_counter()
    problems = []
    deltas = {}
    worst_rem = 0.0
    for Np in PIPE_SIZES:
        ds = []
        for seed in PIPE_SEEDS:
            rep = run_pipeline(Np, 3, {"seed": seed})
            worst_rem = max(worst_rem, _rel(rep.ap_value, rep.trivial_part))
            if _rel(rep.ap_value, rep.trivial_part) > REL:
                problems.append(f"N'={Np} seed={seed}: remainder {rep.nontrivial_remainder:.3g}")
            if rep.audit["wrap"] != 0 or rep.audit["genuine"] != 0:
                problems.append(f"N'={Np} seed={seed}: audit {rep.audit}")
            if abs(rep.majorant["mean"] - 1.0) > 1e-12:
                problems.append(f"N'={Np} seed={seed}: majorant mean {rep.majorant['mean']!r}")
            if has_k_ap(rep.B, 3):
                problems.append(f"N'={Np} seed={seed}: B has a 3-AP")
            ds.append(rep.delta_report.delta)
        deltas[Np] = float(np.mean(ds))
    seq = [deltas[n] for n in PIPE_SIZES]
    steps = [b <= a for a, b in zip(seq, seq[1:])]
    ok = not problems and sum(steps) >= 2
    trend = ", ".join(f"{n}:{d:.4f}" for n, d in deltas.items())
    assert _record(9, "pipeline: ap == d=0 part, wrap 0, mean nu 1, delta trend", ok,
                   f"seed-mean delta {trend}; nonincreasing steps {sum(steps)}/{len(steps)}; "
                   f"worst rel remainder {worst_rem:.1e}; "
                   f"problems {problems[:3]}", t0)


def test_c10_dense_model_loop():
    t0 = time.perf_counter()
    bad, conv = [], 0
    for seed in range(50):
        nu = seeded_nu(8, seed, 0.3)
        mask = np.random.default_rng([seed, 10]).random(8) < 0.5
        f = nu.values * mask
        res = dense_model_greedy(f, 3, seed=seed)
        ft = res.model.values
        stop = 0.05 if res.converged else res.distance
        chk = dense_model_verify(f, ft, 3, stop)
        conv += res.converged
        if ft.min() < 0 or ft.max() > 1 or not chk.satisfied or not chk.mean_within_distance:
            bad.append(seed)
    ok = not bad
    assert _record(10, "dense model in [0,1], verified, mean gap <= distance", ok,
                   f"50 seeds N=8, {conv} converged at 0.05, failures {bad}", t0)


if __name__ == "__main__":
    results = []
    for name, fn in sorted(globals().items()):
        if name.startswith("test_c") and callable(fn):
            try:
                fn()
                results.append(True)
            except AssertionError:
                results.append(False)
    sys.exit(0 if all(results) else 1)
