"""Cut norms and Gowers box norms of real tensors.

The cut norm of an r-ary tensor h on X_0 x ... x X_{r-1} is

    sup | E_x h(x) prod_j 1_{A_j}(x_{-j}) |,   A_j a subset of X_{-j}.

The expectation is multilinear in each indicator, so the supremum over
[0, 1]-valued test functions is attained at sets, and with every other set
fixed the best A_j is a sign pattern of its conditional sum. Exact
evaluation enumerates one side and solves the rest in closed form; beyond
the exact range we run seeded coordinate ascent over sign patterns, which
yields a certified lower bound.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .contract import contract
from .hypergraph import WeightedHypergraph

#: r = 2 is exact when the smaller side has at most this many points
EXACT_LIMIT_R2 = 22
#: r = 3 is exact when |X_0| * |X_1| is at most this
EXACT_LIMIT_R3 = 16
DEFAULT_RESTARTS = 64
#: negative pre-root Gowers averages above -CLAMP_TOL are rounding noise
CLAMP_TOL = 1e-10


class NumericalConsistencyError(ArithmeticError):
    pass


@dataclass(frozen=True)
class CutNormResult:
    value: float
    exact: bool
    certificate: tuple  # boolean arrays, certificate[j] lives on X_{-j}
    restarts_used: int = 0
    signed: float = field(default=0.0, compare=False)

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "exact": self.exact,
            "restarts_used": self.restarts_used,
            "certificate": [np.flatnonzero(np.asarray(a).ravel()).tolist() for a in self.certificate],
        }


def certificate_value(h, sets) -> float:
    """Signed average E h(x) prod_j 1_{A_j}(x_{-j}) for explicit sets."""
    h = np.asarray(h, dtype=np.float64)
    w = h
    for j, a in enumerate(sets):
        w = w * np.expand_dims(np.asarray(a, dtype=np.float64), j)
    return float(w.sum()) / h.size if h.size else 0.0


def _mask_bits(masks: np.ndarray, n: int) -> np.ndarray:
    return ((masks[:, None] >> np.arange(n)) & 1).astype(np.float64)


def _exact_r2(h: np.ndarray):
    transpose = h.shape[0] > h.shape[1]
    m = h.T if transpose else h  # enumerate subsets of the rows of m
    n0, n1 = m.shape
    best = (-1.0, 0, None, 0.0)
    chunk = 1 << 16
    for start in range(0, 1 << n0, chunk):
        masks = np.arange(start, min(1 << n0, start + chunk), dtype=np.int64)
        cols = _mask_bits(masks, n0) @ m
        pos = np.where(cols > 0, cols, 0).sum(axis=1)
        neg = -np.where(cols < 0, cols, 0).sum(axis=1)
        for arr, sign in ((pos, 1.0), (neg, -1.0)):
            i = int(np.argmax(arr))
            if arr[i] > best[0]:
                best = (float(arr[i]), int(masks[i]), sign, 0.0)
    _, mask, sign, _ = best
    rows = np.array([(mask >> t) & 1 for t in range(n0)], dtype=bool)
    colsum = rows.astype(float) @ m
    cols = colsum > 0 if sign > 0 else colsum < 0
    # certificate[0] lives on X_1 (columns of h), certificate[1] on X_0
    cert = (rows, cols) if transpose else (cols, rows)
    return cert


def _exact_r3(h: np.ndarray):
    n0, n1, n2 = h.shape
    subsets0 = _mask_bits(np.arange(1 << n0, dtype=np.int64), n0)  # candidate A_1 slices on X_0
    best = (-1.0, None)
    total = 1 << (n0 * n1)
    chunk = max(1, (1 << 20) // ((1 << n0) * n1 * n2))
    for start in range(0, total, chunk):
        masks = np.arange(start, min(total, start + chunk), dtype=np.int64)
        a2 = _mask_bits(masks, n0 * n1).reshape(-1, n0, n1)
        m = h[None] * a2[..., None]  # (c, x0, x1, x2)
        # s[c, C, x1, x2] = sum_{x0 in C} m[c, x0, x1, x2]
        s = np.einsum("sa,cabz->csbz", subsets0, m)
        up = np.where(s > 0, s, 0).sum(axis=2).max(axis=1).sum(axis=1)
        dn = -np.where(s < 0, s, 0).sum(axis=2).min(axis=1).sum(axis=1)
        for arr, sign in ((up, 1.0), (dn, -1.0)):
            i = int(np.argmax(arr))
            if arr[i] > best[0]:
                best = (float(arr[i]), (int(masks[i]), sign))
    mask, sign = best[1]
    a2 = np.array([(mask >> t) & 1 for t in range(n0 * n1)], dtype=bool).reshape(n0, n1)
    m = h * a2[..., None]
    a0 = np.zeros((n1, n2), dtype=bool)  # on X_1 x X_2
    a1 = np.zeros((n0, n2), dtype=bool)  # on X_0 x X_2
    for z in range(n2):
        s = subsets0 @ m[:, :, z]  # (C, x1)
        part = np.where(s * sign > 0, s * sign, 0).sum(axis=1)
        c = int(np.argmax(part))
        a1[:, z] = subsets0[c].astype(bool)
        a0[:, z] = s[c] * sign > 0
    return (a0, a1, a2)


def _conditional(h: np.ndarray, sets, j: int) -> np.ndarray:
    w = h
    for i, a in enumerate(sets):
        if i != j:
            w = w * np.expand_dims(a, i)
    return w.sum(axis=j)


def _ascent(h: np.ndarray, restarts: int, seed: int, max_sweeps: int = 200):
    rng = np.random.default_rng(seed)
    r = h.ndim
    shapes = [tuple(s for i, s in enumerate(h.shape) if i != j) for j in range(r)]
    best_val, best_sets = -1.0, None
    for _ in range(restarts):
        init = [rng.random(s) < 0.5 for s in shapes]
        for sign in (1.0, -1.0):
            sets = [a.astype(np.float64) for a in init]
            prev = None
            for _ in range(max_sweeps):
                for j in range(r):
                    c = _conditional(h, sets, j) * sign
                    sets[j] = (c > 0).astype(np.float64)
                key = tuple(a.tobytes() for a in sets)
                if key == prev:
                    break
                prev = key
            val = abs(certificate_value(h, sets))
            if val > best_val:
                best_val, best_sets = val, [a.astype(bool) for a in sets]
    return tuple(best_sets)


def exact_feasible(shape) -> bool:
    r = len(shape)
    if r <= 1:
        return True
    if r == 2:
        return min(shape) <= EXACT_LIMIT_R2
    if r == 3:
        return shape[0] * shape[1] <= EXACT_LIMIT_R3
    return False


def cut_norm_hypergraph(h, restarts: int = DEFAULT_RESTARTS, seed: int = 0,
                        mode: str = "auto") -> CutNormResult:
    """Cut norm of an r-ary tensor; ``mode`` is "auto" or "heuristic"."""
    h = np.asarray(h, dtype=np.float64)
    r = h.ndim
    if r == 0:
        raise ValueError("cut norm needs a tensor of rank >= 1")
    if not np.any(h):
        cert = tuple(np.zeros([s for i, s in enumerate(h.shape) if i != j], dtype=bool) for j in range(r))
        return CutNormResult(0.0, True, cert, 0, 0.0)
    if mode == "auto" and exact_feasible(h.shape):
        if r == 1:
            cert = (np.ones((), dtype=bool),)
        elif r == 2:
            cert = _exact_r2(h)
        else:
            cert = _exact_r3(h)
        used, exact = 0, True
    elif mode in ("auto", "heuristic"):
        cert = _ascent(h, restarts, seed)
        used, exact = restarts, False
    else:
        raise ValueError(f"unknown mode {mode!r}")
    signed = certificate_value(h, cert)
    return CutNormResult(abs(signed), exact, tuple(cert), used, signed)


def sum_tensor(f, r: int) -> np.ndarray:
    """h(x_1, ..., x_r) = f(x_1 + ... + x_r) on Z_N^r."""
    v = np.asarray(getattr(f, "values", f), dtype=np.float64).ravel()
    N = v.size
    return v[np.indices((N,) * r).sum(axis=0) % N]


def cut_norm_arithmetic(f, r: int, restarts: int = DEFAULT_RESTARTS, seed: int = 0,
                        mode: str = "auto") -> CutNormResult:
    """Cut norm of f(x_1 + ... + x_r) for a signed function f on Z_N."""
    if r < 2:
        raise ValueError("arithmetic cut norm needs r >= 2")
    return cut_norm_hypergraph(sum_tensor(f, r), restarts=restarts, seed=seed, mode=mode)


def cut_norm_slices(g: WeightedHypergraph, **kw) -> list[CutNormResult]:
    return [cut_norm_hypergraph(s, **kw) for s in g.slices]


def cut_norm_tuple(g: WeightedHypergraph, **kw) -> float:
    """Maximum of the slice cut norms."""
    return max(res.value for res in cut_norm_slices(g, **kw))


@dataclass(frozen=True)
class GowersNorm:
    value: float
    power: float  # signed 2^r-fold average before the root
    r: int


def gowers_power(h) -> float:
    h = np.asarray(h, dtype=np.float64)
    r = h.ndim
    factors = [(h, tuple((i, w[i]) for i in range(r))) for w in itertools.product((0, 1), repeat=r)]
    return contract(factors)


def gowers_norm(h, r: int | None = None) -> GowersNorm:
    """U^r norm of an r-ary tensor by direct contraction of all 2^r factors."""
    h = np.asarray(h, dtype=np.float64)
    if r is not None and r != h.ndim:
        raise ValueError(f"tensor has rank {h.ndim}, not {r}")
    r = h.ndim
    if r < 1:
        raise ValueError("Gowers norm needs r >= 1")
    p = gowers_power(h)
    if p < 0:
        if p < -CLAMP_TOL:
            raise NumericalConsistencyError(f"Gowers average {p!r} is negative beyond rounding")
        p_used = 0.0
    else:
        p_used = p
    return GowersNorm(p_used ** (1.0 / 2 ** r), p, r)


def gowers_norm_arithmetic(f, r: int) -> GowersNorm:
    return gowers_norm(sum_tensor(f, r))
