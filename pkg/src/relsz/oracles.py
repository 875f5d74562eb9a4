"""Brute-force reference evaluations.

Everything here enumerates the full domain directly and shares no code path
with the contraction engine or the branch-and-bound search it is used to
check.
"""

from __future__ import annotations

import itertools

import numpy as np


def ap_masks(N: int, k: int) -> np.ndarray:
    """Bitmasks (bit x-1 for element x) of every nontrivial k-AP inside [N]."""
    masks = []
    for a in range(1, N + 1):
        for d in range(1, N):
            last = a + (k - 1) * d
            if last > N:
                break
            m = 0
            for t in range(k):
                m |= 1 << (a + t * d - 1)
            masks.append(m)
    return np.array(masks, dtype=np.uint64)


def rk_enumerate(N_max: int, k: int, chunk: int = 1 << 18) -> list[int]:
    """r_k(n) for n = 1..N_max by checking every subset of [N_max].

    A subset of [n] is a mask below 2^n, so one pass over all 2^N_max masks
    serves every prefix length at once.
    """
    if N_max > 24:
        raise ValueError("subset enumeration is limited to N <= 24")
    aps = ap_masks(N_max, k)
    best = np.zeros(N_max + 1, dtype=np.int64)
    total = 1 << N_max
    for start in range(0, total, chunk):
        m = np.arange(start, min(total, start + chunk), dtype=np.uint64)
        free = np.ones(m.size, dtype=bool)
        for ap in aps:
            free &= (m & ap) != ap
        good = m[free]
        if good.size == 0:
            continue
        pop = np.zeros(good.size, dtype=np.int64)
        top = np.zeros(good.size, dtype=np.int64)
        for bit in range(N_max):
            on = ((good >> np.uint64(bit)) & np.uint64(1)).astype(bool)
            pop += on
            top[on] = bit + 1
        # a mask whose largest element is t is a subset of [n] for all n >= t
        for t in range(N_max + 1):
            sel = top == t
            if sel.any():
                best[t] = max(best[t], pop[sel].max())
    return list(np.maximum.accumulate(best)[1:])


def ap_count_enumerate(values, k: int) -> float:
    """Direct double loop over (x, d) in Z_N^2."""
    v = list(map(float, values))
    N = len(v)
    total = 0.0
    for x in range(N):
        for d in range(N):
            p = 1.0
            for i in range(k):
                p *= v[(x + i * d) % N]
            total += p
    return total / (N * N)


def _omega_bits(k: int, j: int, w: int) -> dict[int, int]:
    others = [i for i in range(k) if i != j]
    return {i: (w >> t) & 1 for t, i in enumerate(others)}


def lfc_grid_factors(nu, k: int) -> np.ndarray:
    """Values of every linear-form factor of the 2-blow-up on the full grid.

    Returns an array of shape (k * 2^(k-1), N^(2k)); row j*2^(k-1) + w holds
    nu(sum_i (j-i) x_i^(omega_i)) evaluated at every point of Z_N^(2k)
    (parts numbered from 1 in the coefficient, from 0 in the row index).
    """
    v = np.asarray(nu, dtype=np.float64).ravel()
    N = v.size
    grid = np.indices((N,) * (2 * k)).reshape(2 * k, -1)  # axis 2*i + c is x_i^(c)
    rows = []
    for j in range(k):
        for w in range(2 ** (k - 1)):
            bits = _omega_bits(k, j, w)
            arg = np.zeros(grid.shape[1], dtype=np.int64)
            for i, c in bits.items():
                arg += (j - i) * grid[2 * i + c]
            rows.append(v[arg % N])
    return np.array(rows)


def lfc_value_grid(nu, k: int, exponents) -> float:
    """One pattern average by materialising all of Z_N^(2k)."""
    flat = np.asarray(exponents, dtype=bool).ravel()
    rows = lfc_grid_factors(nu, k)
    prod = np.ones(rows.shape[1])
    for f in np.flatnonzero(flat):
        prod *= rows[f]
    return float(np.add.reduce(prod)) / prod.size


def lfc_values_grid_all(nu, k: int, chunk: int = 4096) -> np.ndarray:
    """All 2^(k 2^(k-1)) pattern averages; entry p has factor f active iff bit f of p is set.

    Subset products are built one factor at a time (P[S | f] = P[S] * row_f)
    on chunks of grid points.
    """
    rows = lfc_grid_factors(nu, k)
    F = rows.shape[0]
    if F > 16:
        raise ValueError("all-pattern enumeration is limited to k <= 3")
    npts = rows.shape[1]
    acc = np.zeros(1 << F)
    for s in range(0, npts, chunk):
        blk = rows[:, s:s + chunk]
        P = np.ones((1 << F, blk.shape[1]))
        for f in range(F):
            half = 1 << f
            P[half:2 * half] = P[:half] * blk[f]
        acc += P.sum(axis=1)
    return acc / npts


def lfc_value_loops(nu, k: int, exponents) -> float:
    """Literal nested loops over all 2k variables (tiny N only)."""
    v = list(map(float, np.asarray(nu).ravel()))
    N = len(v)
    ex = np.asarray(exponents, dtype=bool)
    active = []
    for j in range(k):
        for w in range(2 ** (k - 1)):
            if ex[j, w]:
                active.append((j, _omega_bits(k, j, w)))
    total = 0.0
    for point in itertools.product(range(N), repeat=2 * k):
        p = 1.0
        for j, bits in active:
            arg = sum((j - i) * point[2 * i + c] for i, c in bits.items())
            p *= v[arg % N]
        total += p
    return total / N ** (2 * k)


def cut_norm_enumerate(h) -> float:
    """Cut norm of an r-ary tensor by trying every tuple of test sets.

    Only usable when the total number of set tuples is tiny.
    """
    h = np.asarray(h, dtype=np.float64)
    r = h.ndim
    shape = h.shape
    dom = []
    for j in range(r):
        sub = tuple(s for i, s in enumerate(shape) if i != j)
        dom.append(sub)
    sizes = [int(np.prod(s)) if s else 1 for s in dom]
    if sum(sizes) > 20:
        raise ValueError("too many set tuples to enumerate")
    best = 0.0
    for masks in itertools.product(*(range(1 << n) for n in sizes)):
        weight = np.ones(shape)
        for j, m in enumerate(masks):
            bits = np.array([(m >> t) & 1 for t in range(sizes[j])], dtype=float).reshape(dom[j])
            weight = weight * np.expand_dims(bits, j)
        best = max(best, abs(float((h * weight).sum())) / h.size)
    return best


def gowers_power_enumerate(h) -> float:
    """The 2^r-fold Gowers average by direct enumeration of all doubled points."""
    h = np.asarray(h, dtype=np.float64)
    r = h.ndim
    total = 0.0
    ranges = [range(s) for s in h.shape for _ in range(2)]
    for point in itertools.product(*ranges):
        p = 1.0
        for omega in itertools.product((0, 1), repeat=r):
            p *= h[tuple(point[2 * i + omega[i]] for i in range(r))]
        total += p
    return total / np.prod([s * s for s in h.shape])


def strong_lfc_loops(nu_slices, g_slices, gt_slices, choice) -> float:
    """Nested loops for E (nu_{-last} - 1) prod_{j < last} prod_c h_{j,c}, last part doubled.

    Slice j is indexed by the parts other than j in increasing order; the
    last part k-1 carries two copies x^(0), x^(1) and h_{j,c} = gt if
    choice[j][c] else g, evaluated with copy c of the last part.
    """
    k = len(nu_slices)
    N = np.asarray(nu_slices[0]).shape[0]
    total = 0.0
    for xs in itertools.product(range(N), repeat=k - 1):
        base = float(nu_slices[k - 1][xs]) - 1.0
        if base == 0.0:
            continue
        for y0 in range(N):
            for y1 in range(N):
                p = base
                for j in range(k - 1):
                    for c, y in ((0, y0), (1, y1)):
                        idx = tuple(xs[i] for i in range(k - 1) if i != j) + (y,)
                        src = gt_slices if choice[j][c] else g_slices
                        p *= float(src[j][idx])
                total += p
    return total / N ** (k + 1)
