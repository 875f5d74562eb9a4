"""Counting lemmas on weighted hypergraphs, with every explicit constant measured.

``relative_counting_gap`` replays one induction level of the relative
counting argument on a concrete instance: it evaluates both sides of each
sub-inequality that carries an explicit constant and records whether it
holds. The composite bound has an unknown implicit constant, so it is only
reported as a ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .contract import contract
from .hypergraph import WeightedHypergraph, clique_density
from .norms import cut_norm_arithmetic, cut_norm_hypergraph, cut_norm_slices
from .pseudo import (
    BOUND_TOL,
    LfcReport,
    PreconditionError,
    check_domination,
    lfc_delta,
    strong_lfc_bound,
    strong_lfc_lhs,
)
from .zcore import DensityFunction, mean, psum

IDENTITY_TOL = 1e-12


def _le(a: float, b: float, tol: float = BOUND_TOL) -> bool:
    return a <= b * (1 + 1e-9) + tol


def _require_bounded(g: WeightedHypergraph, name: str):
    for j, s in enumerate(g.slices):
        bad = np.argwhere((s < 0) | (s > 1))
        if bad.size:
            idx = tuple(int(t) for t in bad[0])
            raise PreconditionError(f"{name} leaves [0, 1] at slice {j}, index {idx}: {s[idx]!r}")


def marginal(g: WeightedHypergraph, part: int = 0) -> np.ndarray:
    """E_{x_part} prod_{j != part} g_{-j}, a tensor on X_{-part}."""
    factors = [(g.slices[j], g.labels(j, lambda i: i)) for j in range(g.k) if j != part]
    keep = [i for i in range(g.k) if i != part]
    return contract(factors, keep=keep)


@dataclass
class MarginalTriple:
    g_prime: np.ndarray
    nu_prime: np.ndarray
    gtilde_prime: np.ndarray
    part: int = 0

    @property
    def g_prime_capped(self) -> np.ndarray:
        # entrywise min: g' - capped must equal max(g' - 1, 0)
        return np.minimum(self.g_prime, 1.0)

    def cap_excess(self) -> np.ndarray:
        return self.g_prime - self.g_prime_capped


def marginals(g: WeightedHypergraph, nu: WeightedHypergraph, gt: WeightedHypergraph,
              part: int = 0) -> MarginalTriple:
    for other in (nu, gt):
        g._check_compatible(other)
    trip = MarginalTriple(marginal(g, part), marginal(nu, part), marginal(gt, part), part)
    lhs = psum(g.slices[part] * trip.g_prime) / trip.g_prime.size
    rhs = clique_density(g)
    if abs(lhs - rhs) > 1e-9 * max(1.0, abs(rhs)):
        raise ArithmeticError(f"marginal identity failed: {lhs!r} != {rhs!r}")
    return trip


@dataclass
class DenseCountingResult:
    gap: float
    bound: float
    satisfied: bool
    epsilon: float
    exact: bool
    terms: list  # telescoping terms, one per slice
    slice_norms: list

    def __iter__(self):
        yield from (self.gap, self.bound, self.satisfied)


def telescoping_terms(g: WeightedHypergraph, gt: WeightedHypergraph) -> list[float]:
    """E[(g - gt)_{-t} prod_{j<t} g_{-j} prod_{j>t} gt_{-j}] for each t; they sum to the gap."""
    out = []
    diff = g - gt
    for t in range(g.k):
        factors = []
        for j in range(g.k):
            s = diff.slices[j] if j == t else (g.slices[j] if j < t else gt.slices[j])
            factors.append((s, g.labels(j, lambda i: i)))
        out.append(contract(factors))
    return out


def dense_counting_gap(g: WeightedHypergraph, gt: WeightedHypergraph) -> DenseCountingResult:
    """|t(g) - t(gt)| against k * ||g - gt||_box for [0, 1]-valued g, gt."""
    _require_bounded(g, "g")
    _require_bounded(gt, "gtilde")
    norms = cut_norm_slices(g - gt)
    eps = max(r.value for r in norms)
    gap = abs(clique_density(g) - clique_density(gt))
    bound = g.k * eps
    return DenseCountingResult(
        gap=gap,
        bound=bound,
        satisfied=_le(gap, bound),
        epsilon=eps,
        exact=all(r.exact for r in norms),
        terms=telescoping_terms(g, gt),
        slice_norms=[r.value for r in norms],
    )


@dataclass
class CountingDiagnostics:
    k: int
    N: int
    m: int
    gap: float
    epsilon: float
    delta: float
    bound_shape: float
    ratio: float
    certified: bool
    terms: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)

    @property
    def all_checks_pass(self) -> bool:
        return all(self.checks.values())

    def failed(self) -> list[str]:
        return [k for k, ok in self.checks.items() if not ok]

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "N": self.N,
            "m": self.m,
            "gap": self.gap,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "bound_shape": self.bound_shape,
            "ratio": self.ratio,
            "certified": self.certified,
            "terms": self.terms,
            "checks": self.checks,
        }


def counting_bound_shape(delta: float, eps: float, k: int) -> float:
    return delta ** (1.0 / 2 ** (2 ** k + k - 2)) + eps ** (1.0 / 2 ** (2 ** k - 1))


def relative_counting_gap(g: WeightedHypergraph, gt: WeightedHypergraph, nu: WeightedHypergraph,
                          report: LfcReport | None = None, part: int | None = None) -> CountingDiagnostics:
    """Gap |t(g) - t(gt)| for 0 <= g <= nu, 0 <= gt <= 1, plus the induction-step audit.

    The audited step removes the majorant of ``part`` (default: the first
    slice of nu that is not identically 1). Each entry of ``checks`` is an
    inequality with explicit constants; its inputs are kept in ``terms``
    under the same key.
    """
    check_domination(g, nu, "g")
    _require_bounded(gt, "gtilde")
    k, N = g.k, g.N
    if report is None:
        report = lfc_delta(nu)
    delta = report.delta
    nontrivial = nu.nontrivial_slices()
    m = len(nontrivial)
    if part is None:
        part = nontrivial[0] if nontrivial else 0
    p = part

    t_g, t_gt = clique_density(g), clique_density(gt)
    gap_signed = t_g - t_gt
    gap = abs(gap_signed)
    norms = cut_norm_slices(g - gt)
    eps = max(r.value for r in norms)
    shape = counting_bound_shape(delta, eps, k)
    terms: dict = {}
    checks: dict = {}

    if m == 0:
        terms["dense"] = {"gap": gap, "bound": k * eps}
        checks["dense"] = _le(gap, k * eps)

    tri = marginals(g, nu, gt, p)
    gp, nup, gtp, gcap = tri.g_prime, tri.nu_prime, tri.gtilde_prime, tri.g_prime_capped
    avg = lambda a: psum(a) / a.size  # noqa: E731

    # second moment of the marginal majorant
    e_nu, e_nu2 = avg(nup), avg(nup ** 2)
    e_abs, e_sq = avg(np.abs(nup - 1)), avg((nup - 1) ** 2)
    terms["var_nu"] = {"mean_nu_prime": e_nu, "mean_nu_prime_sq": e_nu2, "mean_abs_dev": e_abs,
                       "mean_sq_dev": e_sq, "bound": 3 * delta}
    checks["var_nu"] = _le(e_abs ** 2, e_sq) and _le(e_sq, 3 * delta)
    checks["var_nu_moments"] = all(_le(1 - delta, x) and _le(x, 1 + delta) for x in (e_nu, e_nu2))

    # capping error, entrywise
    excess = gp - gcap
    slack = np.abs(nup - 1) - excess
    terms["cap_nu"] = {"min_excess": float(excess.min()), "min_slack": float(slack.min()),
                       "identity_err": float(np.max(np.abs(excess - np.maximum(gp - 1, 0))))}
    checks["cap_nu"] = bool(excess.min() >= -IDENTITY_TOL and slack.min() >= -IDENTITY_TOL)

    # cut distance of the capped marginal
    cut_cap = cut_norm_hypergraph(gcap - gtp)
    cut_raw = cut_norm_hypergraph(gp - gtp)
    mean_excess = avg(excess)
    terms["cap_small"] = {"lhs": cut_cap.value, "lhs_exact": cut_cap.exact, "capping": mean_excess,
                          "uncapped_cut": cut_raw.value, "instantiated_bound": mean_excess + cut_raw.value,
                          "bound": math.sqrt(3 * delta) + cut_raw.value}
    checks["cap_small"] = (_le(cut_cap.value, mean_excess + cut_raw.value)
                           and _le(mean_excess, e_abs) and _le(e_abs, math.sqrt(3 * delta)))

    # split of the gap through the marginal
    gs, gts = g.slices[p], gt.slices[p]
    first = avg(gs * (gp - gtp))
    second = avg((gs - gts) * gtp)
    terms["split"] = {"first": first, "second": second, "gap_signed": gap_signed}
    checks["split"] = abs(first + second - gap_signed) <= 1e-9 * max(1.0, abs(gap_signed))
    terms["errorone"] = {"value": abs(second), "bound": eps}
    checks["errorone"] = _le(abs(second), eps)

    # Cauchy-Schwarz with the strong linear forms terms
    e_sq_diff = avg((gp - gtp) ** 2)
    e_nup = avg(nu.slices[p])
    weighted = avg(nu.slices[p] * (gp - gtp) ** 2)
    choice = lambda a, b: np.array([[a, b]] * (k - 1))  # noqa: E731
    s_gg = strong_lfc_lhs(nu, g, gt, choice(False, False), part=p, validate=False)
    s_gt = strong_lfc_lhs(nu, g, gt, choice(False, True), part=p, validate=False)
    s_tt = strong_lfc_lhs(nu, g, gt, choice(True, True), part=p, validate=False)
    slfc = strong_lfc_bound(delta, k)
    bound_two = (1 + delta) * (4 * slfc + e_sq_diff)
    terms["errortwo"] = {"lhs": first ** 2, "weighted": weighted * e_nup, "mean_nu": e_nup,
                         "s_gg": s_gg.value, "s_gt": s_gt.value, "s_tt": s_tt.value,
                         "strong_lfc_bound": slfc, "bound": bound_two}
    expand_err = abs(avg((nu.slices[p] - 1) * (gp - gtp) ** 2) - (s_gg.value - 2 * s_gt.value + s_tt.value))
    checks["errortwo_expansion"] = expand_err <= 1e-9 * max(1.0, weighted)
    checks["errortwo"] = (_le(first ** 2, weighted * e_nup) and _le(e_nup, 1 + delta)
                          and all(_le(abs(s.value), slfc) for s in (s_gg, s_gt, s_tt))
                          and _le(weighted * e_nup, bound_two))

    # second moment of the marginal difference
    cap_term = avg((gp - gtp) * excess)
    e_nu_abs = avg(nup * np.abs(nup - 1))
    base = avg(gtp ** 2)
    d1 = avg(gp * gcap) - base
    d2 = avg(gp * gtp) - base
    d3 = avg(gtp * gcap) - base
    terms["errorfive"] = {"lhs": e_sq_diff, "cap_term": cap_term, "nu_abs_dev": e_nu_abs,
                          "d1": d1, "d2": d2, "d3": d3,
                          "instantiated_bound": 3 * delta + math.sqrt(3 * delta) + abs(d1) + abs(d2) + abs(d3)}
    checks["errorfive_identity"] = abs(e_sq_diff - (cap_term + d1 - d2 - d3)) <= 1e-9 * max(1.0, e_sq_diff)
    checks["errorfive"] = (_le(cap_term, e_nu_abs) and _le(e_nu_abs, 3 * delta + math.sqrt(3 * delta))
                           and _le(e_sq_diff, terms["errorfive"]["instantiated_bound"]))

    terms["finalerror"] = {"gap": gap, "bound_shape": shape, "ratio": gap / shape if shape > 0 else math.inf}
    return CountingDiagnostics(k, N, m, gap, eps, delta, shape, terms["finalerror"]["ratio"],
                               report.certified and all(r.exact for r in norms), terms, checks)


# ---------------------------------------------------------------------------
# dense models on Z_N
# ---------------------------------------------------------------------------

@dataclass
class DenseModelCheck:
    distance: float
    satisfied: bool
    exact: bool
    mean_gap: float

    @property
    def mean_within_distance(self) -> bool:
        return _le(self.mean_gap, self.distance)

    def __iter__(self):
        yield from (self.distance, self.satisfied)


def dense_model_verify(f, ftilde, k: int, epsilon_bound: float) -> DenseModelCheck:
    """Cut distance ||f - ftilde||_{box, k-1} for a [0, 1]-valued ftilde."""
    ft = np.asarray(getattr(ftilde, "values", ftilde), dtype=np.float64)
    if np.any(ft < 0) or np.any(ft > 1):
        raise PreconditionError("ftilde must take values in [0, 1]")
    fv = np.asarray(getattr(f, "values", f), dtype=np.float64)
    res = cut_norm_arithmetic(fv - ft, k - 1)
    return DenseModelCheck(res.value, _le(res.value, epsilon_bound), res.exact, abs(mean(fv) - mean(ft)))


@dataclass
class DenseModelResult:
    model: DensityFunction
    rounds: int
    converged: bool
    distance: float
    cells: np.ndarray  # partition labels on Z_N
    history: list = field(default_factory=list, repr=False)  # (model, distance) per round


def _dual_function(sets, N: int, r: int) -> np.ndarray:
    w = np.ones((N,) * r)
    for j, a in enumerate(sets):
        w = w * np.expand_dims(np.asarray(a, dtype=np.float64), j)
    idx = np.indices((N,) * r).sum(axis=0) % N
    return np.bincount(idx.ravel(), weights=w.ravel(), minlength=N)


def _refine(labels: np.ndarray, *keys) -> np.ndarray:
    stacked = np.stack([labels.astype(np.float64)] + [np.round(np.asarray(key, dtype=np.float64), 12) for key in keys])
    _, new = np.unique(stacked.T, axis=0, return_inverse=True)
    return new.ravel()


def conditional_model(v: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """min(1, E[v | cell]) on each cell of the partition ``labels``."""
    v = np.asarray(getattr(v, "values", v), dtype=np.float64)
    labels = np.asarray(labels)
    sums = np.bincount(labels, weights=v)
    counts = np.bincount(labels)
    return np.minimum(1.0, (sums / counts)[labels])


def dense_model_greedy(f, k: int, threshold: float = 0.05, max_rounds: int = 32,
                       max_cells: int = 1 << 12, restarts: int = 64, seed: int = 0) -> DenseModelResult:
    """Energy-increment construction of a [0, 1]-valued model of f.

    The model is min(1, E[f | partition]). Each round takes the test sets
    certifying the current cut distance and splits every cell by the level
    sets of the function they induce on Z_N and by the sign of f - model.
    Stops once the distance is at most ``threshold``; otherwise returns the
    best model seen with ``converged=False``.
    """
    if k < 3:
        raise ValueError("dense models are defined for k >= 3")
    v = np.asarray(getattr(f, "values", f), dtype=np.float64)
    if np.any(v < 0):
        raise PreconditionError("f must be nonnegative")
    N = v.size
    if v.max() <= 1.0:
        return DenseModelResult(DensityFunction(v), 0, True, 0.0, np.arange(N), [(DensityFunction(v), 0.0)])
    r = k - 1
    labels = np.zeros(N, dtype=np.int64)
    best = None
    history = []
    for rnd in range(max_rounds + 1):
        model = conditional_model(v, labels)
        res = cut_norm_arithmetic(v - model, r, restarts=restarts, seed=seed + rnd)
        history.append((DensityFunction(model), res.value))
        if best is None or res.value < best.distance:
            best = DenseModelResult(DensityFunction(model), rnd, False, res.value, labels.copy(), history)
        if res.value <= threshold:
            best = DenseModelResult(DensityFunction(model), rnd, True, res.value, labels.copy(), history)
            break
        if rnd == max_rounds:
            break
        new = _refine(labels, _dual_function(res.certificate, N, r), np.sign(v - model))
        if new.max() + 1 > max_cells or new.max() == labels.max():
            break
        labels = new
    return best
