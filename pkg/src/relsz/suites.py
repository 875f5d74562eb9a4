"""Seeded inequality suites with measured slack.

Each scope draws one instance per seed, evaluates both sides of the
inequalities it covers and records ``slack = rhs - lhs`` (negative means
failure). The first failing instance stops the run and is serialised so it
can be replayed exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .counting import dense_counting_gap, marginals, relative_counting_gap
from .hypergraph import WeightedHypergraph
from .pseudo import (BOUND_TOL, _report, all_mixed_values, assignment_from_index,
                     lfc_values_all, mixed_blowup_average, strong_lfc_bound, strong_lfc_lhs,
                     uniformity_from_lfc)
from .zcore import DensityFunction

SCOPES = ("lemB", "corB", "lemC", "propD_dense", "propD_chain", "eqD_varnu", "eqD_capnu")

#: default sizes per scope (N values cycled over seeds)
DEFAULT_SIZES = {
    "lemB": (5,), "corB": (3, 4, 5), "lemC": (5,), "propD_dense": (3, 4, 5, 6, 7, 8),
    "propD_chain": (5,), "eqD_varnu": (5,), "eqD_capnu": (5,),
}

#: relative slop allowed on the larger side of an inequality
REL_TOL = 1e-9

SPREADS = (0.05, 0.2, 0.5, 1.0)


class SuiteFailure(AssertionError):
    def __init__(self, row: dict, instance: dict):
        super().__init__(f"{row['scope']} failed at seed {row['seed']}: {row['tag']} (slack {row['slack']:.3g})")
        self.row = row
        self.instance = instance


@dataclass
class SuiteSummary:
    scope: str
    rows: list = field(default_factory=list)

    @property
    def passed(self) -> int:
        return sum(r["pass"] for r in self.rows)

    @property
    def failed(self) -> int:
        return len(self.rows) - self.passed

    @property
    def min_slack(self) -> float:
        return min((r["slack"] for r in self.rows), default=math.inf)

    def to_json(self) -> dict:
        return {"scope": self.scope, "instances": len(self.rows), "passed": self.passed,
                "failed": self.failed, "min_slack": self.min_slack, "rows": self.rows}


# ---------------------------------------------------------------------------
# seeded instances
# ---------------------------------------------------------------------------

def seeded_nu(N: int, seed: int, spread: float | None = None) -> DensityFunction:
    """Mean-one weight 1 + s (u - mean u), u uniform on [0, 1], s drawn from SPREADS."""
    rng = np.random.default_rng(seed)
    if spread is None:
        spread = SPREADS[int(rng.integers(len(SPREADS)))]
    u = rng.random(N)
    return DensityFunction(1.0 + spread * (u - u.mean()))


def seeded_triple(N: int, seed: int, k: int = 3):
    """(nu, g, gt) with 0 <= g <= nu built as g = min(nu, c gt) for a random c in [1, 2]."""
    nu = WeightedHypergraph.from_arithmetic(seeded_nu(N, seed), k)
    rng = np.random.default_rng([seed, 1])
    gt = WeightedHypergraph.random(k, N, rng)
    c = 1.0 + rng.random()
    g = nu.combine(gt, lambda a, b: np.minimum(a, c * b))
    return nu, g, gt


def seeded_masked(N: int, seed: int, k: int = 3):
    """(nu, g, gt) with g = nu times a random 0/1 mask and gt uniform on [0, 1]."""
    nu = WeightedHypergraph.from_arithmetic(seeded_nu(N, seed), k)
    rng = np.random.default_rng([seed, 2])
    mask = WeightedHypergraph(k, N, tuple((rng.random(s.shape) < 0.6).astype(float) for s in nu.slices))
    gt = WeightedHypergraph.random(k, N, rng)
    return nu, nu * mask, gt


def _hg_json(h: WeightedHypergraph) -> dict:
    return {"k": h.k, "N": h.N, "slices": [s.tolist() for s in h.slices]}


def _row(scope, seed, N, tag, lhs, rhs, **extra) -> dict:
    lhs, rhs = float(lhs), float(rhs)
    slack = rhs - lhs
    ok = lhs <= rhs * (1 + REL_TOL) + BOUND_TOL if rhs >= 0 else lhs <= rhs + BOUND_TOL
    row = {"scope": scope, "seed": seed, "N": N, "tag": tag, "lhs": lhs, "rhs": rhs, "slack": slack, "pass": bool(ok)}
    row.update(extra)
    return row


def _pattern_delta(nu: WeightedHypergraph):
    vals = lfc_values_all(nu)
    return vals, _report(nu, dict(enumerate(vals)), "exhaustive", vals.size, None)


# ---------------------------------------------------------------------------
# scopes
# ---------------------------------------------------------------------------

def _lemB(seed, N, k, nu=None):
    nu_a = seeded_nu(N, seed) if nu is None else nu
    g = WeightedHypergraph.from_arithmetic(nu_a, k)
    vals, rep = _pattern_delta(g)
    S, K = all_mixed_values(vals, k)
    sel = K >= 1
    ratio_lhs = np.abs(S[sel])
    rhs = (2.0 ** K[sel]) * rep.delta
    slack = rhs - ratio_lhs
    worst = int(np.argmin(slack))
    idx = int(np.flatnonzero(sel)[worst])
    # spot-check the transform against direct contraction on a few assignments
    rng = np.random.default_rng([seed, 3])
    probe = [idx] + [int(i) for i in rng.integers(0, S.size, size=4)]
    direct = max(abs(mixed_blowup_average(g, assignment_from_index(k, i)) - S[i]) for i in probe)
    rows = [_row("lemB", seed, N, "|S| <= 2^K delta", float(ratio_lhs[worst]), float(rhs[worst]),
                 K=int(K[idx]), assignment=int(idx), delta=rep.delta,
                 assignments_checked=int(sel.sum()), failures=int((slack < -BOUND_TOL).sum()))]
    rows.append(_row("lemB", seed, N, "transform == direct contraction", direct, 1e-9 * max(1.0, float(np.abs(S).max()))))
    return rows, {"nu": nu_a.values.tolist()}


def _corB(seed, N, k, nu=None):
    nu_a = seeded_nu(N, seed) if nu is None else nu
    g = WeightedHypergraph.from_arithmetic(nu_a, k)
    _, rep = _pattern_delta(g)
    u = uniformity_from_lfc(g, report=rep)
    rows = [
        _row("corB", seed, N, "cut(nu-1) <= U(nu-1)", u.cut_norm, u.u_norm, cut_exact=u.cut_exact),
        _row("corB", seed, N, "U(nu-1) <= 2 delta^(1/2^(k-1))", u.u_norm, u.bound, delta=rep.delta),
    ]
    return rows, {"nu": nu_a.values.tolist()}


def _lemC(seed, N, k):
    nu, g, gt = seeded_masked(N, seed, k)
    _, rep = _pattern_delta(nu)
    bound = strong_lfc_bound(rep.delta, k)
    rows = []
    for c in range(1 << (2 * (k - 1))):
        choice = np.array([[(c >> (2 * t + e)) & 1 for e in range(2)] for t in range(k - 1)], dtype=bool)
        res = strong_lfc_lhs(nu, g, gt, choice)
        steps = res.step_checks(rep.delta)
        rows.append(_row("lemC", seed, N, "|strong lfc| <= 2(1+delta)^(1-e) delta^e", abs(res.value), bound,
                         h_choice=int(c), delta=rep.delta, chain_ok=all(steps.values())))
        if not all(steps.values()):
            rows[-1]["pass"] = False
            rows[-1]["failed_steps"] = [s for s, ok in steps.items() if not ok]
    return rows, {"nu": _hg_json(nu), "g": _hg_json(g), "gt": _hg_json(gt)}


def _propD_dense(seed, N, k):
    rng = np.random.default_rng([seed, 4])
    g = WeightedHypergraph.random(k, N, rng)
    gt = WeightedHypergraph.random(k, N, rng)
    if seed % 3 == 1:  # nearby pair
        gt = g.combine(gt, lambda a, b: np.clip(a + 0.1 * (b - 0.5), 0, 1))
    res = dense_counting_gap(g, gt)
    rows = [_row("propD_dense", seed, N, "gap <= k * cut distance", res.gap, res.bound, exact=res.exact,
                 epsilon=res.epsilon)]
    return rows, {"g": _hg_json(g), "gt": _hg_json(gt)}


def _propD_chain(seed, N, k):
    nu, g, gt = seeded_triple(N, seed, k)
    _, rep = _pattern_delta(nu)
    diag = relative_counting_gap(g, gt, nu, report=rep)
    rows = []
    for key, ok in diag.checks.items():
        t = diag.terms.get(key, {})
        lhs, rhs = _chain_sides(key, t)
        row = _row("propD_chain", seed, N, key, lhs, rhs, delta=rep.delta)
        row["pass"] = bool(ok)
        rows.append(row)
    rows.append({"scope": "propD_chain", "seed": seed, "N": N, "tag": "gap / bound shape (reported only)",
                 "lhs": diag.gap, "rhs": diag.bound_shape, "slack": diag.bound_shape - diag.gap,
                 "ratio": diag.ratio, "pass": True})
    return rows, {"nu": _hg_json(nu), "g": _hg_json(g), "gt": _hg_json(gt)}


def _chain_sides(key: str, t: dict):
    if "lhs" in t and ("bound" in t or "instantiated_bound" in t):
        return float(t["lhs"]), float(t.get("instantiated_bound", t.get("bound")))
    if key == "var_nu":
        return float(t["mean_sq_dev"]), float(t["bound"])
    if key == "errorone":
        return float(t["value"]), float(t["bound"])
    if key == "cap_nu":
        return float(-t["min_slack"]), 0.0
    return float("nan"), float("nan")


def _eqD(scope, seed, N, k):
    nu, g, gt = seeded_triple(N, seed, k)
    tri = marginals(g, nu, gt, 0)
    if scope == "eqD_capnu":
        excess = tri.g_prime - tri.g_prime_capped
        slack = np.abs(tri.nu_prime - 1) - excess
        rows = [
            _row(scope, seed, N, "0 <= g' - min(g', 1)", float(-excess.min()), 0.0),
            _row(scope, seed, N, "g' - min(g', 1) <= |nu' - 1|", float(-slack.min()), 0.0),
            _row(scope, seed, N, "g' - min(g', 1) == max(g' - 1, 0)",
                 float(np.abs(excess - np.maximum(tri.g_prime - 1, 0)).max()), 1e-12),
        ]
    else:
        _, rep = _pattern_delta(nu)
        d = tri.nu_prime - 1
        e_abs, e_sq = float(np.abs(d).mean()), float((d ** 2).mean())
        rows = [
            _row(scope, seed, N, "(E|nu'-1|)^2 <= E(nu'-1)^2", e_abs ** 2, e_sq),
            _row(scope, seed, N, "E(nu'-1)^2 <= 3 delta", e_sq, 3 * rep.delta, delta=rep.delta),
        ]
    return rows, {"nu": _hg_json(nu), "g": _hg_json(g), "gt": _hg_json(gt)}


def run_instance(scope: str, seed: int, N: int, k: int = 3, nu=None):
    """Rows and serialised instance for a single seed."""
    if scope == "lemB":
        return _lemB(seed, N, k, nu)
    if scope == "corB":
        return _corB(seed, N, k, nu)
    if nu is not None:
        raise ValueError(f"scope {scope} draws its own weights")
    if scope == "lemC":
        return _lemC(seed, N, k)
    if scope == "propD_dense":
        return _propD_dense(seed, N, k)
    if scope == "propD_chain":
        return _propD_chain(seed, N, k)
    if scope in ("eqD_varnu", "eqD_capnu"):
        return _eqD(scope, seed, N, k)
    raise ValueError(f"unknown scope {scope!r}; expected one of {SCOPES}")


def emit_inequality_suite(scope: str, seeds=20, sizes=None, k: int = 3, nu=None,
                          abort: bool = True) -> SuiteSummary:
    """Run ``scope`` on seeds 0..seeds-1 (or an explicit seed list).

    ``sizes`` are cycled over the seeds. With ``abort`` the first failing
    instance raises SuiteFailure carrying the instance for replay.
    """
    if scope not in SCOPES:
        raise ValueError(f"unknown scope {scope!r}; expected one of {SCOPES}")
    if k != 3:
        raise ValueError("the suites certify with exhaustive delta, available for k = 3 only")
    seed_list = list(range(seeds)) if isinstance(seeds, int) else list(seeds)
    sizes = tuple(sizes or DEFAULT_SIZES[scope])
    summary = SuiteSummary(scope)
    for t, seed in enumerate(seed_list):
        N = int(sizes[t % len(sizes)])
        rows, inst = run_instance(scope, int(seed), N, k, nu)
        summary.rows.extend(rows)
        bad = next((r for r in rows if not r["pass"]), None)
        if bad is not None and abort:
            inst.update({"scope": scope, "seed": int(seed), "N": N, "k": k})
            raise SuiteFailure(bad, inst)
    return summary


__all__ = ["SCOPES", "SuiteFailure", "SuiteSummary", "emit_inequality_suite", "run_instance",
           "seeded_nu", "seeded_triple", "seeded_masked"]
