"""Linear forms conditions, mixed blow-up averages and the strong LFC chain.

A pattern assigns an exponent n_{j,w} in {0, 1} to every edge of the
2-blow-up of the complete (k-1)-uniform hypergraph on k parts: ``j`` is the
omitted part and ``w`` encodes the copy bits of the remaining parts in
increasing order (bit t of ``w`` is the copy of the t-th remaining part).
The edge (j, w) is evaluated on the variables ``(i, copy_i)`` for i != j,
which lines up with the axes of slice j.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .contract import DEFAULT_MAX_ELEMENTS, contract
from .hypergraph import WeightedHypergraph
from .norms import cut_norm_hypergraph, gowers_norm
from .zcore import DensityFunction

ONE, NU, NU_MINUS_ONE = 0, 1, 2
#: slack for comparing a measured quantity against an explicit bound
BOUND_TOL = 1e-12
EXHAUSTIVE_MAX_K = 3
DEFAULT_PATTERN_SAMPLES = 256


class PreconditionError(ValueError):
    pass


def n_slots(k: int) -> int:
    return k * 2 ** (k - 1)


def slot_bits(k: int, j: int, w: int) -> dict[int, int]:
    others = [i for i in range(k) if i != j]
    return {i: (w >> t) & 1 for t, i in enumerate(others)}


def slot_labels(k: int, j: int, w: int) -> tuple:
    return tuple((i, c) for i, c in slot_bits(k, j, w).items())


@dataclass(frozen=True)
class LfcPattern:
    k: int
    exponents: np.ndarray  # bool, shape (k, 2^(k-1))

    def __post_init__(self):
        ex = np.array(self.exponents, dtype=bool)
        if ex.shape != (self.k, 2 ** (self.k - 1)):
            raise ValueError(f"pattern shape {ex.shape} != {(self.k, 2 ** (self.k - 1))}")
        ex.setflags(write=False)
        object.__setattr__(self, "exponents", ex)

    @classmethod
    def from_int(cls, k: int, p: int) -> "LfcPattern":
        F = n_slots(k)
        bits = [(p >> f) & 1 for f in range(F)]
        return cls(k, np.array(bits, dtype=bool).reshape(k, -1))

    @classmethod
    def all_ones(cls, k: int) -> "LfcPattern":
        return cls(k, np.ones((k, 2 ** (k - 1)), dtype=bool))

    @classmethod
    def single(cls, k: int, j: int, w: int) -> "LfcPattern":
        ex = np.zeros((k, 2 ** (k - 1)), dtype=bool)
        ex[j, w] = True
        return cls(k, ex)

    def to_int(self) -> int:
        return int(sum(1 << f for f in np.flatnonzero(self.exponents.ravel())))

    def bitstring(self) -> str:
        return "".join("1" if b else "0" for b in self.exponents.ravel())

    def active(self):
        for j, w in zip(*np.nonzero(self.exponents)):
            yield int(j), int(w)

    def __eq__(self, other):
        return isinstance(other, LfcPattern) and self.k == other.k and np.array_equal(self.exponents, other.exponents)

    def __hash__(self):
        return hash((self.k, self.to_int()))


@dataclass
class LfcReport:
    k: int
    N: int
    delta: float
    worst_pattern: LfcPattern
    method: str  # "exhaustive", "sampled" or "point_sampled"
    samples: int = 0
    seed: int | None = None
    per_pattern: dict = field(default_factory=dict, repr=False)

    @property
    def certified(self) -> bool:
        return self.method == "exhaustive"

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "N": self.N,
            "delta": self.delta,
            "method": self.method,
            "worst_pattern": self.worst_pattern.bitstring(),
            "samples": self.samples,
            "seed": self.seed,
        }


def as_hypergraph(nu, k: int | None = None) -> WeightedHypergraph:
    if isinstance(nu, WeightedHypergraph):
        if k is not None and k != nu.k:
            raise ValueError("k does not match the hypergraph")
        return nu
    if k is None:
        raise ValueError("k is required for an arithmetic weight")
    return WeightedHypergraph.from_arithmetic(nu, k)


def lfc_value_hypergraph(nu: WeightedHypergraph, p: LfcPattern,
                         max_elements: int = DEFAULT_MAX_ELEMENTS) -> float:
    if p.k != nu.k:
        raise ValueError("pattern and hypergraph disagree on k")
    factors = [(nu.slices[j], slot_labels(nu.k, j, w)) for j, w in p.active()]
    if not factors:
        return 1.0
    return contract(factors, max_elements=max_elements)


def lfc_value_arithmetic(nu, k: int, p: LfcPattern, max_elements: int = DEFAULT_MAX_ELEMENTS) -> float:
    """E over Z_N^(2k) of prod nu(sum_i (j-i) x_i^(w_i)) over the active edges."""
    if k < 2:
        raise ValueError("k must be at least 2")
    return lfc_value_hypergraph(WeightedHypergraph.from_arithmetic(nu, k), p, max_elements)


def lfc_values_all(nu, k: int | None = None) -> np.ndarray:
    """Contracted value of every pattern, indexed by ``LfcPattern.to_int``."""
    g = as_hypergraph(nu, k)
    F = n_slots(g.k)
    if g.k > EXHAUSTIVE_MAX_K:
        raise ValueError("exhaustive pattern enumeration is limited to k <= 3")
    return np.array([lfc_value_hypergraph(g, LfcPattern.from_int(g.k, p)) for p in range(1 << F)])


def _report(g, values: dict, method: str, samples: int, seed) -> LfcReport:
    dev = {p: abs(v - 1.0) for p, v in values.items()}
    worst = max(dev, key=lambda p: (dev[p], -p))
    return LfcReport(g.k, g.N, dev[worst], LfcPattern.from_int(g.k, worst), method, samples, seed, dev)


def lfc_delta(nu, k: int | None = None, samples: int = DEFAULT_PATTERN_SAMPLES, seed: int = 0,
              exhaustive: bool | None = None) -> LfcReport:
    """Largest |pattern average - 1|.

    Exhaustive for k <= 3. Otherwise the all-ones pattern, every
    single-edge pattern and ``samples`` uniformly random patterns are
    evaluated, and the result is only a lower bound on the true deviation.
    """
    g = as_hypergraph(nu, k)
    F = n_slots(g.k)
    if exhaustive is None:
        exhaustive = g.k <= EXHAUSTIVE_MAX_K
    if exhaustive:
        vals = lfc_values_all(g)
        return _report(g, dict(enumerate(vals)), "exhaustive", 1 << F, None)
    rng = np.random.default_rng(seed)
    chosen = [(1 << F) - 1] + [1 << f for f in range(F)]
    for _ in range(samples):
        bits = rng.random(F) < 0.5
        chosen.append(int(sum(1 << f for f in np.flatnonzero(bits))))
    chosen = list(dict.fromkeys(chosen))
    values = {p: lfc_value_hypergraph(g, LfcPattern.from_int(g.k, p)) for p in chosen}
    return _report(g, values, "sampled", samples, seed)


def lfc_delta_point_sampled(nu, k: int, points: int = 20000, seed: int = 0,
                            patterns: list[int] | None = None, chunk: int = 2048) -> LfcReport:
    """Monte Carlo estimate for weights on groups too large to contract.

    Every pattern is averaged over the same ``points`` random points of
    Z_N^(2k). Points are drawn as uniform reals scaled by N, so one seed
    gives coupled samples on different moduli. The estimate carries
    sampling error in both directions and never certifies anything.
    """
    v = np.asarray(getattr(nu, "values", nu), dtype=np.float64).ravel()
    N = v.size
    F = n_slots(k)
    if patterns is None and F > 16:
        raise ValueError("pass an explicit pattern list for k >= 4")
    pats = list(range(1 << F)) if patterns is None else list(patterns)
    rng = np.random.default_rng(seed)
    u = rng.random((2 * k, points))
    x = np.minimum((u * N).astype(np.int64), N - 1)
    sums = np.zeros(len(pats))
    for start in range(0, points, chunk):
        xs = x[:, start:start + chunk]
        rows = np.empty((F, xs.shape[1]))
        for j in range(k):
            for w in range(2 ** (k - 1)):
                arg = np.zeros(xs.shape[1], dtype=np.int64)
                for i, c in slot_bits(k, j, w).items():
                    arg += (j - i) * xs[2 * i + c]
                rows[j * 2 ** (k - 1) + w] = v[arg % N]
        if patterns is None:
            P = np.ones((1 << F, xs.shape[1]))
            for f in range(F):
                half = 1 << f
                P[half:2 * half] = P[:half] * rows[f]
            sums += P.sum(axis=1)
        else:
            for t, p in enumerate(pats):
                sel = [f for f in range(F) if (p >> f) & 1]
                sums[t] += rows[sel].prod(axis=0).sum() if sel else xs.shape[1]
    values = {p: float(s) / points for p, s in zip(pats, sums)}
    g = WeightedHypergraph.constant(k, 1)  # shape carrier for the report
    rep = _report(g, values, "point_sampled", points, seed)
    rep.N = N
    return rep


def lfc_holds(report: LfcReport, delta: float) -> bool:
    return report.delta <= delta


# ---------------------------------------------------------------------------
# mixed factors 1, nu, nu - 1
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MixedFactorAssignment:
    k: int
    codes: np.ndarray  # int, shape (k, 2^(k-1)), entries ONE / NU / NU_MINUS_ONE

    def __post_init__(self):
        c = np.array(self.codes, dtype=np.int8)
        if c.shape != (self.k, 2 ** (self.k - 1)):
            raise ValueError("assignment shape does not match k")
        if not np.all(np.isin(c, (ONE, NU, NU_MINUS_ONE))):
            raise ValueError("codes must be ONE, NU or NU_MINUS_ONE")
        c.setflags(write=False)
        object.__setattr__(self, "codes", c)

    @property
    def K(self) -> int:
        return int(np.count_nonzero(self.codes == NU_MINUS_ONE))

    @classmethod
    def from_flat(cls, k: int, flat) -> "MixedFactorAssignment":
        return cls(k, np.asarray(flat).reshape(k, -1))


def mixed_blowup_average(nu: WeightedHypergraph, a: MixedFactorAssignment,
                         max_elements: int = DEFAULT_MAX_ELEMENTS) -> float:
    if a.k != nu.k:
        raise ValueError("assignment and hypergraph disagree on k")
    factors = []
    for j, w in zip(*np.nonzero(a.codes)):
        s = nu.slices[j] if a.codes[j, w] == NU else nu.slices[j] - 1.0
        factors.append((s, slot_labels(nu.k, int(j), int(w))))
    if not factors:
        return 1.0
    return contract(factors, max_elements=max_elements)


def mixed_expansion(nu: WeightedHypergraph, a: MixedFactorAssignment, pattern_values=None) -> float:
    """Signed sum over all ways of resolving each nu - 1 into nu or -1."""
    flat = a.codes.ravel()
    base = sum(1 << f for f in np.flatnonzero(flat == NU))
    minus = list(np.flatnonzero(flat == NU_MINUS_ONE))
    total = 0.0
    for picks in itertools.product((0, 1), repeat=len(minus)):
        p = base + sum(1 << int(f) for f, b in zip(minus, picks) if b)
        val = (pattern_values[p] if pattern_values is not None
               else lfc_value_hypergraph(nu, LfcPattern.from_int(nu.k, p)))
        total += (-1) ** (len(minus) - sum(picks)) * val
    return total


def all_mixed_values(pattern_values: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """S for all 3^F assignments from the 2^F pattern values, by multilinearity.

    Returns (values, K) as flat arrays in base-3 order: digit f (least
    significant first) of the index is the code of slot f.
    """
    F = n_slots(k)
    P = np.asarray(pattern_values, dtype=np.float64)
    if P.size != 1 << F:
        raise ValueError("need one value per pattern")
    # C-order reshape puts slot F-1 on axis 0; reverse so axis f is slot f
    t = P.reshape((2,) * F).transpose(tuple(range(F - 1, -1, -1)))
    resolve = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 1.0]])  # ONE, NU, NU-1 from (absent, present)
    for f in range(F):
        t = np.moveaxis(np.tensordot(resolve, t, axes=([1], [f])), 0, f)
    digits = np.indices((3,) * F)
    Ks = (digits == NU_MINUS_ONE).sum(axis=0)
    # flatten with slot 0 least significant
    order = tuple(range(F - 1, -1, -1))
    return t.transpose(order).ravel(), Ks.transpose(order).ravel()


def assignment_from_index(k: int, idx: int) -> MixedFactorAssignment:
    F = n_slots(k)
    digits = [(idx // 3 ** f) % 3 for f in range(F)]
    return MixedFactorAssignment.from_flat(k, digits)


# ---------------------------------------------------------------------------
# strong linear forms chain
# ---------------------------------------------------------------------------

@dataclass
class StrongLfcResult:
    value: float
    chain: list  # S_k, S_{k-1}, ..., S_1
    weights: list  # averaged majorant weight pulled out at each Cauchy-Schwarz step
    k: int

    def bound(self, delta: float) -> float:
        return strong_lfc_bound(delta, self.k)

    def step_checks(self, delta: float, tol: float = BOUND_TOL) -> dict:
        """Every explicit-constant inequality of the chain at this delta."""
        k = self.k
        out = {}
        for t in range(k - 1):
            s_hi, s_lo, wt = self.chain[t], self.chain[t + 1], self.weights[t]
            out[f"cs_step_{k - t}"] = s_hi ** 2 <= wt * s_lo * (1 + 1e-9) + tol
            out[f"weight_{k - t}"] = wt <= 1 + delta + tol
        out["chain_bottom"] = abs(self.chain[-1]) <= 2 ** (2 ** (k - 1)) * delta + tol
        out["final"] = abs(self.value) <= self.bound(delta) + tol
        return out


def strong_lfc_bound(delta: float, k: int) -> float:
    e = 1.0 / 2 ** (k - 1)
    return 2 * (1 + delta) ** (1 - e) * delta ** e


def check_domination(g: WeightedHypergraph, upper: WeightedHypergraph, name: str = "g", tol: float = 0.0):
    if not g.is_nonnegative():
        j, idx = next((j, tuple(map(int, np.argwhere(s < 0)[0]))) for j, s in enumerate(g.slices) if np.any(s < 0))
        raise PreconditionError(f"{name} is negative at slice {j}, index {idx}")
    bad = g.first_violation(upper, tol)
    if bad is not None:
        j, idx = bad
        raise PreconditionError(
            f"{name} exceeds its majorant at slice {j}, index {idx}: "
            f"{g.slices[j][idx]!r} > {upper.slices[j][idx]!r}")


def _chain_factors(nu, g, gt, choice, m: int):
    """Factors of S_m (m = k .. 1) with the last part as the doubled special part.

    Parts m-1 .. k-1 (0-based) are doubled, earlier parts are single.
    """
    k = nu.k
    sp = k - 1
    D = list(range(m - 1, k))
    ones = np.ones((nu.N,) * (k - 1))

    def labels(j, bits):
        return tuple((i, bits.get(i, 0)) for i in range(k) if i != j)

    def copies(parts):
        for combo in itertools.product((0, 1), repeat=len(parts)):
            yield dict(zip(parts, combo))

    factors = []
    for j in range(m - 1, k - 1):
        for bits in copies([i for i in D if i != j]):
            maj = ones if choice[j][bits[sp]] else nu.slices[j]
            factors.append((maj, labels(j, bits)))
    for bits in copies([i for i in D if i != sp]):
        factors.append((nu.slices[sp] - 1.0, labels(sp, bits)))
    for j in range(m - 1):
        for bits in copies(D):
            h = gt.slices[j] if choice[j][bits[sp]] else g.slices[j]
            factors.append((h, labels(j, bits)))
    return factors


def _weight_factors(nu, choice, m: int):
    """Majorant weight isolated when passing from S_m to S_{m-1}."""
    k = nu.k
    sp = k - 1
    j = m - 2
    D = list(range(m - 1, k))
    ones = np.ones((nu.N,) * (k - 1))
    factors = []
    for combo in itertools.product((0, 1), repeat=len(D)):
        bits = dict(zip(D, combo))
        maj = ones if choice[j][bits[sp]] else nu.slices[j]
        factors.append((maj, tuple((i, bits.get(i, 0)) for i in range(k) if i != j)))
    return factors


def strong_lfc_lhs(nu: WeightedHypergraph, g: WeightedHypergraph, gt: WeightedHypergraph,
                   h_choice, part: int | None = None, validate: bool = True) -> StrongLfcResult:
    """E (nu_{-p}(x_{-p}) - 1) prod_{j != p} prod_{c in {0,1}} h_{j,c}, with x_p doubled.

    ``h_choice[t][c]`` is False for g and True for gt, where t runs over the
    parts other than ``part`` (default: the last part) in increasing order
    and c is the copy of x_p. The Cauchy-Schwarz chain S_k, ..., S_1 is
    evaluated alongside.
    """
    k = nu.k
    if part is None:
        part = k - 1
    choice = np.asarray(h_choice, dtype=bool)
    if choice.shape != (k - 1, 2):
        raise ValueError(f"h_choice must have shape {(k - 1, 2)}")
    if validate:
        check_domination(g, nu, "g")
        if not gt.is_bounded(1.0):
            j = next(j for j, s in enumerate(gt.slices) if np.any((s < 0) | (s > 1)))
            idx = tuple(map(int, np.argwhere((gt.slices[j] < 0) | (gt.slices[j] > 1))[0]))
            raise PreconditionError(f"gtilde leaves [0, 1] at slice {j}, index {idx}")
    if part != k - 1:
        order = [i for i in range(k) if i != part] + [part]
        nu, g, gt = nu.relabel(order), g.relabel(order), gt.relabel(order)
    chain = [contract(_chain_factors(nu, g, gt, choice, m)) for m in range(k, 0, -1)]
    weights = [contract(_weight_factors(nu, choice, m)) for m in range(k, 1, -1)]
    return StrongLfcResult(chain[0], chain, weights, k)


# ---------------------------------------------------------------------------
# uniformity of nu - 1
# ---------------------------------------------------------------------------

@dataclass
class UniformityReport:
    u_norm: float
    bound: float
    satisfied: bool
    cut_norm: float
    cut_exact: bool
    cut_satisfied: bool
    delta: float
    certified: bool
    per_slice: list = field(default_factory=list)

    @property
    def slack(self) -> float:
        return self.bound - self.u_norm


def uniformity_from_lfc(nu, k: int | None = None, report: LfcReport | None = None) -> UniformityReport:
    """Check cut(nu - 1) <= U^{k-1}(nu - 1) <= 2 delta^(1/2^(k-1)), slice by slice."""
    g = as_hypergraph(nu, k)
    if report is None:
        report = lfc_delta(g)
    e = 1.0 / 2 ** (g.k - 1)
    bound = 2 * report.delta ** e
    per_slice = []
    for s in g.slices:
        h = s - 1.0
        gn = gowers_norm(h)
        cn = cut_norm_hypergraph(h)
        per_slice.append({"gowers": gn.value, "gowers_power": gn.power, "cut": cn.value, "cut_exact": cn.exact})
    u = max(p["gowers"] for p in per_slice)
    cut = max(p["cut"] for p in per_slice)
    cut_exact = all(p["cut_exact"] for p in per_slice)
    return UniformityReport(
        u_norm=u,
        bound=bound,
        satisfied=u <= bound * (1 + 1e-9) + BOUND_TOL,
        cut_norm=cut,
        cut_exact=cut_exact,
        cut_satisfied=cut <= u * (1 + 1e-9) + BOUND_TOL,
        delta=report.delta,
        certified=report.certified,
        per_slice=per_slice,
    )
