"""Functions on Z_N, progression counts, and exact progression-free search.

Two settings live side by side here and are never mixed:

* ``ap_count`` averages over the cyclic group Z_N (wrap-around allowed);
* ``r_k_exact`` and the ``alpha_*`` helpers work in the integer interval
  [N] = {1, ..., N}.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

#: Relative tolerance used when asserting oracle equality of averages.
REL_TOL = 1e-9

#: Default size caps for the exact extremal search.
DEFAULT_SEARCH_CAP = {3: 40}
DEFAULT_SEARCH_CAP_LONG = 60


class SearchBudgetExceeded(RuntimeError):
    """The exact search was asked for a size beyond its configured cap."""


class TableExhausted(ValueError):
    """An inverse lookup needs r_k beyond the tabulated range."""


def psum(values) -> float:
    """Pairwise (tree) summation of a flat float array."""
    arr = np.ascontiguousarray(values, dtype=np.float64).ravel()
    # numpy's add.reduce over a contiguous 1-d float64 array is pairwise
    return float(np.add.reduce(arr))


@dataclass(frozen=True)
class DensityFunction:
    """Nonnegative function on Z_N, stored as an immutable array."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True).ravel()
        if arr.size == 0:
            raise ValueError("a DensityFunction needs a positive modulus")
        if not np.all(np.isfinite(arr)):
            raise ValueError("values must be finite")
        if np.any(arr < 0):
            raise ValueError("values must be nonnegative")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def modulus(self) -> int:
        return self.values.size

    N = modulus

    def __call__(self, n: int) -> float:
        return float(self.values[n % self.modulus])

    def mean(self) -> float:
        return mean(self)

    @classmethod
    def constant(cls, N: int, c: float = 1.0) -> "DensityFunction":
        return cls(np.full(N, float(c)))

    @classmethod
    def indicator(cls, N: int, support: Iterable[int]) -> "DensityFunction":
        v = np.zeros(N)
        for x in support:
            v[x % N] = 1.0
        return cls(v)

    @classmethod
    def random(cls, N: int, rng: np.random.Generator, mean: float | None = 1.0) -> "DensityFunction":
        """Seeded random instance; rescaled to the requested mean unless ``mean`` is None."""
        v = rng.random(N)
        if mean is not None:
            v = v * (mean / (v.sum() / N))
        return cls(v)


def mean(f) -> float:
    vals = f.values if isinstance(f, DensityFunction) else np.asarray(f, dtype=np.float64)
    return psum(vals) / vals.size


def _as_array(f) -> np.ndarray:
    if isinstance(f, DensityFunction):
        return f.values
    return np.asarray(f, dtype=np.float64).ravel()


def ap_count(f, k: int) -> float:
    """E_{x,d in Z_N} f(x) f(x+d) ... f(x+(k-1)d), trivial d = 0 included.

    Works on signed arrays too. When the support is sparse the sum runs over
    pairs of support points (x, x+d), which is the same finite sum with the
    vanishing terms skipped.
    """
    if k < 2:
        raise ValueError("ap_count needs k >= 2")
    v = _as_array(f)
    N = v.size
    support = np.flatnonzero(v)
    if support.size == 0:
        return 0.0
    if support.size ** 2 < N * N // 4:
        x = np.repeat(support, support.size)
        y = np.tile(support, support.size)
        d = (y - x) % N
        term = v[x] * v[y]
        for i in range(2, k):
            term = term * v[(x + i * d) % N]
        return psum(term) / (N * N)
    xs = np.arange(N)
    rows = np.empty(N)
    for d in range(N):
        term = v.copy()
        for i in range(1, k):
            term = term * v[(xs + i * d) % N]
        rows[d] = psum(term)
    return psum(rows) / (N * N)


def ap_trivial_part(f, k: int) -> float:
    """Contribution of the d = 0 progressions to ``ap_count``: mean(f^k)/N."""
    v = _as_array(f)
    return psum(v ** k) / (v.size * v.size)


# ---------------------------------------------------------------------------
# integer interval [N]
# ---------------------------------------------------------------------------

def find_k_ap(elements: Iterable[int], k: int) -> tuple[int, ...] | None:
    """Return some nontrivial k-term progression inside ``elements``, or None."""
    s = sorted(set(int(e) for e in elements))
    members = set(s)
    for i, a in enumerate(s):
        for b in s[i + 1:]:
            d = b - a
            if a + (k - 1) * d > s[-1]:
                break
            if all(a + t * d in members for t in range(2, k)):
                return tuple(a + t * d for t in range(k))
    return None


def has_k_ap(elements: Iterable[int], k: int) -> bool:
    return find_k_ap(elements, k) is not None


@dataclass(frozen=True)
class ExtremalRecord:
    N: int
    k: int
    r_value: int
    witness: tuple[int, ...]

    @property
    def alpha(self) -> float:
        return self.r_value / self.N

    def csv_row(self) -> list:
        return [self.N, self.k, self.r_value, repr(self.alpha), " ".join(map(str, self.witness))]


def _can_add(mask: int, x: int, k: int) -> bool:
    # x exceeds every element of mask, so x can only be the last term
    for d in range(1, (x - 1) // (k - 1) + 1):
        for t in range(1, k):
            if not (mask >> (x - t * d)) & 1:
                break
        else:
            return False
    return True


class _Deadline:
    def __init__(self, budget_s: float | None):
        self.stop = None if budget_s is None else time.monotonic() + budget_s

    def check(self):
        if self.stop is not None and time.monotonic() > self.stop:
            raise SearchBudgetExceeded("search budget exceeded (time)")


def _search_target(N: int, k: int, target: int, table: Sequence[int], deadline: _Deadline):
    """Depth-first search for a k-AP-free subset of [N] of size ``target``.

    ``table[L]`` must hold r_k(L) for L < N; it bounds how many elements a
    tail interval of length L can still contribute.
    """
    chosen: list[int] = []
    nodes = 0

    def dfs(x: int, mask: int, size: int) -> bool:
        nonlocal nodes
        if size == target:
            return True
        remaining = N - x + 1
        if remaining <= 0:
            return False
        if size + min(remaining, table[remaining] if remaining < len(table) else remaining) < target:
            return False
        nodes += 1
        if nodes & 0xFFF == 0:
            deadline.check()
        if _can_add(mask, x, k):
            chosen.append(x)
            if dfs(x + 1, mask | (1 << x), size + 1):
                return True
            chosen.pop()
        return dfs(x + 1, mask, size)

    return tuple(chosen) if dfs(1, 0, 0) else None


def rk_table(N_max: int, k: int, cap: int | None = None, budget_s: float | None = None) -> list[ExtremalRecord]:
    """Exact r_k(n) for n = 1..N_max with witnesses.

    Uses r_k(n-1) <= r_k(n) <= r_k(n-1) + 1: each step is a single decision
    search for a progression-free set one larger than the previous optimum.
    """
    if k < 3:
        raise ValueError("r_k search needs k >= 3")
    if cap is None:
        cap = DEFAULT_SEARCH_CAP.get(k, DEFAULT_SEARCH_CAP_LONG)
    if N_max > cap:
        raise SearchBudgetExceeded(f"search budget exceeded: N={N_max} > cap {cap} for k={k}")
    deadline = _Deadline(budget_s)
    table = [0]
    records: list[ExtremalRecord] = []
    best: tuple[int, ...] = ()
    for n in range(1, N_max + 1):
        found = _search_target(n, k, table[-1] + 1, table, deadline)
        if found is not None:
            best = found
        table.append(len(best))
        records.append(ExtremalRecord(n, k, len(best), best))
    return records


def r_k_exact(N: int, k: int, cap: int | None = None, budget_s: float | None = None) -> ExtremalRecord:
    if N < 1:
        raise ValueError("N must be positive")
    return rk_table(N, k, cap=cap, budget_s=budget_s)[-1]


def alpha_inverse(alpha: float, k: int, N_max: int, table: Sequence[ExtremalRecord] | None = None) -> int:
    """Largest N <= N_max with r_k(N)/N >= alpha."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if table is None:
        table = rk_table(N_max, k)
    table = [rec for rec in table if rec.N <= N_max]
    if len(table) < N_max:
        raise TableExhausted(f"table only reaches N={len(table)}")
    if table[-1].r_value >= alpha * table[-1].N:
        raise TableExhausted(
            f"table exhausted: alpha_{k}({N_max}) = {table[-1].alpha:.6g} is still >= {alpha:.6g}")
    for rec in reversed(table):
        if rec.r_value >= alpha * rec.N:
            return rec.N
    raise TableExhausted(f"no N <= {N_max} reaches density {alpha:.6g}")


def dense_lower_bound(alpha: float, k: int, N_max: int, table: Sequence[ExtremalRecord] | None = None) -> float:
    """(alpha_k^{-1}(alpha/2))^{-2}, with the unknown implicit constant set to 1."""
    m = alpha_inverse(alpha / 2, k, N_max, table=table)
    return 1.0 / (m * m)


def extremal_csv(records: Iterable[ExtremalRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "k", "r", "alpha", "witness"])
    for rec in records:
        w.writerow(rec.csv_row())
    return buf.getvalue()


def read_extremal_csv(text: str) -> list[ExtremalRecord]:
    rows = csv.DictReader(io.StringIO(text))
    out = []
    for row in rows:
        wit = tuple(int(t) for t in row["witness"].split())
        out.append(ExtremalRecord(int(row["N"]), int(row["k"]), int(row["r"]), wit))
    return out
