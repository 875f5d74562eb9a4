"""Weighted (k-1)-uniform k-partite hypergraphs.

Parts are numbered 0..k-1 and every part is a copy of Z_N. Slice ``j`` is
the weight on X_{-j}: a (k-1)-dimensional array whose axes are the parts
``i != j`` in increasing order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .contract import contract


@dataclass(frozen=True)
class WeightedHypergraph:
    k: int
    N: int
    slices: tuple

    def __post_init__(self):
        if len(self.slices) != self.k:
            raise ValueError(f"expected {self.k} slices, got {len(self.slices)}")
        shape = (self.N,) * (self.k - 1)
        frozen = []
        for j, s in enumerate(self.slices):
            arr = np.array(s, dtype=np.float64, copy=True)
            if arr.shape != shape:
                raise ValueError(f"slice {j} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"slice {j} has non-finite entries")
            arr.setflags(write=False)
            frozen.append(arr)
        object.__setattr__(self, "slices", tuple(frozen))

    # -- construction -----------------------------------------------------

    @classmethod
    def constant(cls, k: int, N: int, c: float = 1.0) -> "WeightedHypergraph":
        return cls(k, N, tuple(np.full((N,) * (k - 1), float(c)) for _ in range(k)))

    @classmethod
    def ones(cls, k: int, N: int) -> "WeightedHypergraph":
        return cls.constant(k, N, 1.0)

    @classmethod
    def from_arithmetic(cls, f, k: int) -> "WeightedHypergraph":
        """Slice j is f(sum_i (j - i) x_i), the linear forms of a k-term progression."""
        v = np.asarray(getattr(f, "values", f), dtype=np.float64).ravel()
        N = v.size
        grid = np.indices((N,) * (k - 1))
        slices = []
        for j in range(k):
            others = [i for i in range(k) if i != j]
            arg = sum((j - i) * grid[a] for a, i in enumerate(others))
            slices.append(v[np.asarray(arg) % N])
        return cls(k, N, tuple(slices))

    @classmethod
    def random(cls, k: int, N: int, rng: np.random.Generator, high: float = 1.0) -> "WeightedHypergraph":
        return cls(k, N, tuple(high * rng.random((N,) * (k - 1)) for _ in range(k)))

    # -- elementwise algebra ----------------------------------------------

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "WeightedHypergraph":
        return WeightedHypergraph(self.k, self.N, tuple(fn(s) for s in self.slices))

    def combine(self, other: "WeightedHypergraph", fn) -> "WeightedHypergraph":
        self._check_compatible(other)
        return WeightedHypergraph(self.k, self.N, tuple(fn(a, b) for a, b in zip(self.slices, other.slices)))

    def __sub__(self, other):
        if isinstance(other, WeightedHypergraph):
            return self.combine(other, np.subtract)
        return self.map(lambda s: s - other)

    def __add__(self, other):
        if isinstance(other, WeightedHypergraph):
            return self.combine(other, np.add)
        return self.map(lambda s: s + other)

    def __mul__(self, other):
        if isinstance(other, WeightedHypergraph):
            return self.combine(other, np.multiply)
        return self.map(lambda s: s * other)

    __rmul__ = __mul__

    def _check_compatible(self, other):
        if (self.k, self.N) != (other.k, other.N):
            raise ValueError("hypergraphs have different shapes")

    def with_slice(self, j: int, arr) -> "WeightedHypergraph":
        slices = list(self.slices)
        slices[j] = arr
        return WeightedHypergraph(self.k, self.N, tuple(slices))

    def relabel(self, order: Sequence[int]) -> "WeightedHypergraph":
        """New part p is old part ``order[p]``."""
        if sorted(order) != list(range(self.k)):
            raise ValueError("order must be a permutation of the parts")
        slices = []
        for j in range(self.k):
            old_j = order[j]
            old_axes = [i for i in range(self.k) if i != old_j]
            new_parts = [order[i] for i in range(self.k) if i != j]
            slices.append(np.transpose(self.slices[old_j], [old_axes.index(p) for p in new_parts]))
        return WeightedHypergraph(self.k, self.N, tuple(slices))

    # -- queries ----------------------------------------------------------

    def is_nonnegative(self) -> bool:
        return all(np.all(s >= 0) for s in self.slices)

    def is_bounded(self, hi: float = 1.0) -> bool:
        return all(np.all((s >= 0) & (s <= hi)) for s in self.slices)

    def first_violation(self, upper: "WeightedHypergraph", tol: float = 0.0):
        """First (slice, index) where self > upper + tol, or None."""
        self._check_compatible(upper)
        for j, (a, b) in enumerate(zip(self.slices, upper.slices)):
            bad = np.argwhere(a > b + tol)
            if bad.size:
                return j, tuple(int(t) for t in bad[0])
        return None

    def dominated_by(self, upper: "WeightedHypergraph", tol: float = 0.0) -> bool:
        return self.first_violation(upper, tol) is None

    def nontrivial_slices(self, tol: float = 0.0) -> list[int]:
        """Indices of slices that are not identically 1."""
        return [j for j, s in enumerate(self.slices) if np.any(np.abs(s - 1.0) > tol)]

    def labels(self, j: int, copy_of=lambda i: (i, 0)) -> tuple:
        """Variable labels for slice j, given a map from part to variable label."""
        return tuple(copy_of(i) for i in range(self.k) if i != j)


def clique_density(g: WeightedHypergraph) -> float:
    """E_{x_0..x_{k-1}} prod_j g_{-j}(x_{-j})."""
    factors = [(g.slices[j], g.labels(j, lambda i: i)) for j in range(g.k)]
    return contract(factors)
