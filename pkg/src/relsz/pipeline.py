"""End-to-end run on W-tricked primes at desk scale.

Pick a residue class, build a progression-free set B of positions whose
images b + W n are prime, embed it in Z_M, measure the majorant's linear
forms deviation and count progressions of f_B with the d = 0 part split off.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .pseudo import DEFAULT_PATTERN_SAMPLES, LfcReport, lfc_delta_point_sampled, n_slots
from .sieve import (SieveParams, candidate_positions, choose_residue, domination_ratio, f_B_embed,
                    gpy_majorant, lambda_weight, relative_density, w_trick_params)
from .zcore import SearchBudgetExceeded, TableExhausted, ap_count, ap_trivial_part, dense_lower_bound, mean

SCHEMA_VERSION = "1"

DEFAULTS = {
    "c0": 0.25,
    "gamma": 0.1,
    "floor": 0.5,
    "points": 20000,
    "patterns": DEFAULT_PATTERN_SAMPLES,
    "seed": 0,
    "table_N": 40,
    "c_prime": 1.0,
}


def greedy_ap_free(candidates, k: int) -> list[int]:
    """Scan candidates upward and keep each one that completes no k-AP."""
    cand = sorted(int(c) for c in candidates)
    if not cand:
        return []
    top = cand[-1]
    inB = np.zeros(top + 1, dtype=bool)
    chosen: list[int] = []
    for x in cand:
        ok = True
        if len(chosen) >= k - 1:
            d = x - np.asarray(chosen)
            d = d[(k - 1) * d < x]  # x - (k-1) d >= 1
            hit = np.ones(d.size, dtype=bool)
            for t in range(1, k):
                hit &= inB[x - t * d]
            ok = not hit.any()
        if ok:
            chosen.append(x)
            inB[x] = True
    return chosen


def wraparound_audit(f, k: int) -> dict:
    """Classify every cyclic k-AP (x, d) on the support of f.

    ``trivial``: d = 0. ``genuine``: d != 0 and x, x+d, ... is an honest
    integer progression with no reduction mod M. ``wrap``: the rest.
    """
    v = np.asarray(getattr(f, "values", f))
    M = v.size
    sup = np.flatnonzero(v)
    x = np.repeat(sup, sup.size)
    y = np.tile(sup, sup.size)
    d = (y - x) % M
    ok = np.ones(x.size, dtype=bool)
    for i in range(2, k):
        ok &= v[(x + i * d) % M] != 0
    x, d = x[ok], d[ok]
    nz = d != 0
    last = x + (k - 1) * d
    honest = last < M  # with d in [1, M) no term wrapped
    # negative steps show up as d > M/2 with the terms descending honestly
    neg = M - d
    honest |= (x - (k - 1) * neg >= 0) & (d > 0)
    return {
        "trivial": int((~nz).sum()),
        "genuine": int((nz & honest).sum()),
        "wrap": int((nz & ~honest).sum()),
    }


def szemeredi_sides(ap_value: float, alpha: float, delta: float, k: int, table_N: int,
                    c_prime: float = 1.0) -> dict:
    """Both sides of the relative Szemeredi lower bound with every implicit constant set to 1.

    The right side is 1/(alpha_k^{-1}(alpha/2))^2 - 1/log^{c'}(1/delta). Either
    term is reported as None with a reason when it is undefined at this scale.
    """
    out: dict = {"lhs": ap_value, "c_prime": c_prime, "implicit_constant": 1.0}
    notes = []
    try:
        dense = dense_lower_bound(alpha, k, table_N) if alpha > 0 else None
    except TableExhausted:
        dense = None
        notes.append(f"alpha/2 = {alpha / 2:.4g} lies below alpha_k on the table up to N = {table_N}")
    except SearchBudgetExceeded:
        dense = None
        notes.append("extremal table search exceeded its budget")
    if alpha <= 0:
        notes.append("alpha = 0")
    err = 1.0 / math.log(1.0 / delta) ** c_prime if 0 < delta < 1 else None
    if err is None:
        notes.append(f"delta = {delta:.4g} is not in (0, 1); the error term is undefined")
    out["dense_term"] = dense
    out["error_term"] = err
    out["rhs"] = None if dense is None or err is None else dense - err
    out["notes"] = notes
    return out


@dataclass
class PipelineReport:
    params: SieveParams
    k: int
    B: list
    alpha: float
    delta_report: LfcReport | None
    ap_value: float
    trivial_part: float
    audit: dict
    bound_comparisons: dict
    majorant: dict
    domination: dict
    lambda_mean: float
    config: dict
    timings: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    @property
    def nontrivial_remainder(self) -> float:
        return self.ap_value - self.trivial_part

    def to_json(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "k": self.k,
            "alpha": self.alpha,
            "B_size": len(self.B),
            "B": self.B,
            "delta_report": None if self.delta_report is None else self.delta_report.to_json(),
            "ap_value": self.ap_value,
            "trivial_part": self.trivial_part,
            "nontrivial_remainder": self.nontrivial_remainder,
            "wraparound_audit": self.audit,
            "bound_comparisons": self.bound_comparisons,
            "majorant": self.majorant,
            "domination": self.domination,
            "lambda_mean": self.lambda_mean,
            "provenance": self.params.to_json(),
            "config": self.config,
            "timings": self.timings,
        }


def _delta(nu, k: int, cfg: dict) -> LfcReport:
    if n_slots(k) <= 12:
        return lfc_delta_point_sampled(nu, k, points=cfg["points"], seed=cfg["seed"])
    F = n_slots(k)
    rng = np.random.default_rng(cfg["seed"])
    pats = [(1 << F) - 1] + [1 << f for f in range(F)]
    pats += [int(p) for p in rng.integers(0, 1 << F, size=cfg["patterns"], dtype=np.uint64)]
    rep = lfc_delta_point_sampled(nu, k, points=cfg["points"], seed=cfg["seed"],
                                  patterns=list(dict.fromkeys(pats)))
    rep.method = "point_sampled_patterns"
    return rep


def run_pipeline(N_prime: int, k: int = 3, config: dict | None = None, B=None) -> PipelineReport:
    """Run the W-tricked pipeline; ``config`` keys default to ``DEFAULTS``.

    ``B`` (positions in [N']) defaults to a greedy k-AP-free subset of the
    positions n with b + W n prime.
    """
    cfg = dict(DEFAULTS)
    cfg.update(config or {})
    unknown = set(cfg) - set(DEFAULTS)
    if unknown:
        raise ValueError(f"unknown pipeline keys: {sorted(unknown)}")
    times = {}
    t = time.perf_counter()
    params = w_trick_params(N_prime, c0=cfg["c0"], gamma=cfg["gamma"])
    b, _ = choose_residue(params)
    params = params.with_residue(b)
    times["params"] = time.perf_counter() - t

    t = time.perf_counter()
    if B is None:
        B = greedy_ap_free(candidate_positions(params), k)
    B = sorted(int(n) for n in B)
    f = f_B_embed(params, B)
    alpha = relative_density(params, len(B))
    times["B"] = time.perf_counter() - t

    t = time.perf_counter()
    maj = gpy_majorant(params, floor=cfg["floor"])
    lam = lambda_weight(params)
    rep = _delta(maj.nu, k, cfg)
    times["delta"] = time.perf_counter() - t

    t = time.perf_counter()
    ap = ap_count(f, k)
    triv = ap_trivial_part(f, k)
    audit = wraparound_audit(f, k)
    times["count"] = time.perf_counter() - t

    sides = szemeredi_sides(ap, mean(f), rep.delta, k, cfg["table_N"], cfg["c_prime"])
    dom = {
        "f_over_lambda": domination_ratio(f, lam) if B else 0.0,
        "lambda_over_nu": domination_ratio(lam, maj.nu),
    }
    return PipelineReport(params, k, B, alpha, rep, ap, triv, audit, sides, maj.to_json(),
                          dom, mean(lam), cfg, times)
