"""Mean of a product of small tensors by variable elimination.

A factor is ``(array, labels)`` where ``labels[a]`` names the variable that
indexes axis ``a``. Labels are arbitrary hashables; every variable ranges
over ``range(size)`` as given by the axes it indexes. The result is the
*average* over all variables, so each eliminated variable divides by its
size.
"""

from __future__ import annotations

import math
from typing import Hashable, Iterable, Sequence

import numpy as np

Factor = tuple[np.ndarray, tuple]

#: default cap on the number of entries of any intermediate tensor
DEFAULT_MAX_ELEMENTS = 1 << 24


class ContractionBudgetExceeded(MemoryError):
    pass


def _sizes(factors: Sequence[Factor]) -> dict:
    sizes: dict = {}
    for arr, labels in factors:
        if arr.ndim != len(labels):
            raise ValueError("factor rank does not match its labels")
        for lab, s in zip(labels, arr.shape):
            if sizes.setdefault(lab, s) != s:
                raise ValueError(f"variable {lab!r} has inconsistent sizes")
    return sizes


def _einsum(operands: Sequence[Factor], out: Sequence[Hashable]) -> np.ndarray:
    ids: dict = {}
    args = []
    for arr, labels in operands:
        args.append(arr)
        args.append([ids.setdefault(lab, len(ids)) for lab in labels])
    args.append([ids.setdefault(lab, len(ids)) for lab in out])
    # operands are small; a direct C loop beats path search here
    return np.einsum(*args, optimize=False)


def _pick(live: list[tuple], keep: set, sizes: dict):
    """Next variable: fewest live factors touching it, then smallest merge."""
    best = None
    seen = set()
    for labels in live:
        for v in labels:
            if v in keep or v in seen:
                continue
            seen.add(v)
            touching = [s for s in live if v in s]
            union = set().union(*touching)
            key = (len(touching), math.prod(sizes[u] for u in union))
            if best is None or key < best[0]:
                best = (key, v)
    return None if best is None else best[1]


def elimination_order(factors: Sequence[Factor], keep: Iterable[Hashable] = ()) -> list:
    """Greedy order: next variable is the one touching the fewest live factors.

    Ties go to the smaller merged tensor, then to first appearance.
    """
    keep = set(keep)
    sizes = _sizes(factors)
    live = [tuple(labels) for _, labels in factors]
    order = []
    while (v := _pick(live, keep, sizes)) is not None:
        union = tuple(dict.fromkeys(u for s in live if v in s for u in s if u != v))
        live = [s for s in live if v not in s] + [union]
        order.append(v)
    return order


def contract(factors: Sequence[Factor], keep: Sequence[Hashable] = (),
             max_elements: int = DEFAULT_MAX_ELEMENTS) -> np.ndarray | float:
    """Average of the product of ``factors`` over every variable not in ``keep``.

    Returns a float when ``keep`` is empty, else an array with axes in the
    order of ``keep``. Raises ContractionBudgetExceeded if an intermediate
    would exceed ``max_elements`` entries.
    """
    sizes = _sizes(factors)
    for lab in keep:
        if lab not in sizes:
            raise ValueError(f"kept variable {lab!r} appears in no factor")
    live: list[Factor] = [(np.asarray(a, dtype=np.float64), tuple(l)) for a, l in factors]
    keep_set = set(keep)
    n_keep = math.prod(sizes[u] for u in keep)
    if n_keep > max_elements:
        raise ContractionBudgetExceeded(f"output tensor with {n_keep} entries exceeds budget {max_elements}")
    while (v := _pick([labels for _, labels in live], keep_set, sizes)) is not None:
        touching = [f for f in live if v in f[1]]
        rest = [f for f in live if v not in f[1]]
        out = tuple(dict.fromkeys(lab for _, labels in touching for lab in labels if lab != v))
        n_out = math.prod(sizes[u] for u in out)
        if n_out > max_elements:
            raise ContractionBudgetExceeded(
                f"intermediate tensor with {n_out} entries exceeds budget {max_elements}")
        merged = _einsum(touching, out) / sizes[v]
        live = rest + [(merged, out)]
    keep = tuple(keep)
    if not keep:
        value = 1.0
        for arr, _ in live:
            value *= float(arr)
        return value
    return _einsum(live, keep) if live else np.ones([sizes[u] for u in keep])
