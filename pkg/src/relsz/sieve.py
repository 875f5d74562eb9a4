"""Primes, the W-trick, prime weights on Z_M and a truncated-divisor-sum majorant.

The majorant is a stand-in: a GPY-style square of a smoothly truncated
Mobius sum, normalised empirically. It is not an enveloping sieve with
proven correlation estimates, and all its pseudorandomness is measured,
never assumed.
"""

from __future__ import annotations

import math
import struct
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .pseudo import PreconditionError
from .zcore import DensityFunction, mean

BITSET_MAGIC = b"PRMBITS1"


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

def prime_sieve(n: int) -> np.ndarray:
    """Boolean array ``is_prime[0..n]``."""
    is_p = np.ones(max(n + 1, 2), dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if is_p[p]:
            is_p[p * p::p] = False
    return is_p[: n + 1]


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    return np.flatnonzero(prime_sieve(n)).tolist()


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    return all(n % p for p in range(3, math.isqrt(n) + 1, 2))


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    m = max(n, 2)
    while not is_prime(m):
        m += 1
    return m


def mobius_up_to(n: int) -> np.ndarray:
    """Mobius table mu[0..n] (mu[0] = 0)."""
    mu = np.ones(n + 1, dtype=np.int64)
    mu[0] = 0
    for p in primes_up_to(n):
        mu[p::p] *= -1
        mu[p * p::p * p] = 0
    return mu


def euler_phi_up_to(n: int) -> np.ndarray:
    phi = np.arange(n + 1, dtype=np.int64)
    for p in primes_up_to(n):
        phi[p::p] -= phi[p::p] // p
    return phi


def euler_phi(n: int) -> int:
    result, m = n, n
    p = 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def write_prime_bitset(path, n: int) -> None:
    """Odd-number primality bitset.

    Layout: 8-byte magic ``PRMBITS1``, little-endian uint64 limit ``n``, then
    little-endian uint64 words where bit i (counting across words) is the
    primality of 2i + 1, for 2i + 1 <= n.
    """
    is_p = prime_sieve(n)
    odd = is_p[1::2]
    nbytes = -(-odd.size // 64) * 8
    packed = np.packbits(odd, bitorder="little")
    buf = np.zeros(nbytes, dtype=np.uint8)
    buf[: packed.size] = packed
    Path(path).write_bytes(BITSET_MAGIC + struct.pack("<Q", n) + buf.tobytes())


def read_prime_bitset(path) -> np.ndarray:
    """Inverse of ``write_prime_bitset``: boolean ``is_prime[0..n]``."""
    raw = Path(path).read_bytes()
    if raw[:8] != BITSET_MAGIC:
        raise ValueError("not a prime bitset file")
    (n,) = struct.unpack("<Q", raw[8:16])
    words = np.frombuffer(raw[16:], dtype="<u8")
    bits = np.unpackbits(words.view(np.uint8), bitorder="little").astype(bool)
    is_p = np.zeros(n + 1, dtype=bool)
    odd = bits[: (n + 1) // 2]
    is_p[1::2] = odd
    if n >= 2:
        is_p[2] = True
    return is_p


# ---------------------------------------------------------------------------
# W-trick
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SieveParams:
    N_prime: int
    c0: float
    omega: float
    W: int
    phi_W: int
    b: int
    M: int
    gamma: float
    R: float
    chi: str = "linear"

    def to_json(self) -> dict:
        return asdict(self)

    def with_residue(self, b: int) -> "SieveParams":
        if math.gcd(b, self.W) != 1:
            raise PreconditionError(f"b={b} is not coprime to W={self.W}")
        return replace(self, b=b)


def w_trick_params(N_prime: int, c0: float = 0.25, gamma: float = 0.1, b: int = 1) -> SieveParams:
    """omega = c0 log N', W = prod_{p <= omega} p, M = smallest prime >= 2N'."""
    if N_prime < 3:
        raise ValueError("N' must be at least 3")
    if not 0.25 <= c0 <= 0.5:
        raise ValueError("c0 must lie in [1/4, 1/2]")
    omega = c0 * math.log(N_prime)
    small = primes_up_to(int(math.floor(omega)))
    W = math.prod(small)
    phi_W = math.prod(p - 1 for p in small)
    M = next_prime(2 * N_prime)
    if M > 4 * N_prime:  # Bertrand
        raise ArithmeticError("no prime found in [2N', 4N']")
    if math.gcd(b, W) != 1:
        raise PreconditionError(f"b={b} is not coprime to W={W}")
    return SieveParams(N_prime, c0, omega, W, phi_W, b, M, gamma, float(N_prime) ** gamma)


def residue_counts(params: SieveParams, is_p: np.ndarray | None = None) -> dict[int, int]:
    """#{n in [N'] : b + W n prime} for every b in [1, W] coprime to W."""
    W, Np = params.W, params.N_prime
    if is_p is None:
        is_p = prime_sieve(W * (Np + 1))
    n = np.arange(1, Np + 1)
    return {b: int(is_p[b + W * n].sum()) for b in range(1, W + 1) if math.gcd(b, W) == 1}


def choose_residue(params: SieveParams) -> tuple[int, int]:
    """Most populated residue class; ties go to the smallest b."""
    counts = residue_counts(params)
    b = min(counts, key=lambda c: (-counts[c], c))
    return b, counts[b]


def candidate_positions(params: SieveParams) -> np.ndarray:
    """n in [N'] with b + W n prime."""
    n = np.arange(1, params.N_prime + 1)
    is_p = prime_sieve(params.b + params.W * params.N_prime)
    return n[is_p[params.b + params.W * n]]


def _weight_scale(params: SieveParams) -> float:
    return params.phi_W / params.W * math.log(params.N_prime)


def lambda_weight(params: SieveParams, B=None) -> DensityFunction:
    """(phi(W)/W) log N' 1_{[N']}(n) 1_P(b + W n) on Z_M; ``B`` restricts the support."""
    v = np.zeros(params.M)
    pos = candidate_positions(params)
    if B is not None:
        pos = np.intersect1d(pos, np.asarray(sorted(B), dtype=np.int64))
    v[pos] = _weight_scale(params)
    return DensityFunction(v)


def f_B_embed(params: SieveParams, B, alpha_target: float | None = None) -> DensityFunction:
    """(M/N')(phi(W)/W)(log N') 1_B on Z_M, after checking b + W B is prime."""
    B = sorted(int(n) for n in B)
    for n in B:
        if not 1 <= n <= params.N_prime:
            raise PreconditionError(f"n={n} lies outside [1, N']")
        if not is_prime(params.b + params.W * n):
            raise PreconditionError(f"n={n}: b + W n = {params.b + params.W * n} is not prime")
    v = np.zeros(params.M)
    v[B] = params.M / params.N_prime * _weight_scale(params)
    f = DensityFunction(v)
    if alpha_target is not None and mean(f) < alpha_target:
        raise PreconditionError(f"mean(f_B) = {mean(f):.6g} is below the target {alpha_target:.6g}")
    return f


def relative_density(params: SieveParams, size: int) -> float:
    """alpha with |B| = alpha (W/phi(W)) N'/log N'."""
    return size * params.phi_W / params.W * math.log(params.N_prime) / params.N_prime


def chi_linear(t):
    return np.maximum(0.0, 1.0 - np.asarray(t, dtype=np.float64))


CUTOFFS = {"linear": chi_linear}


@dataclass
class Majorant:
    nu: DensityFunction
    raw: np.ndarray  # unnormalised sieve weight on Z_M
    scale: float  # raw * scale has mean 1 over Z_M
    floor: float

    def to_json(self) -> dict:
        return {"scale": float(self.scale), "floor": self.floor, "mean": mean(self.nu),
                "max": float(self.nu.values.max()), "min": float(self.nu.values.min())}


def truncated_divisor_sum(params: SieveParams) -> np.ndarray:
    """s(n) = sum_{d | Wn + b, d <= R} mu(d) chi(log d / log R) for n in [N'] (index n)."""
    chi = CUTOFFS[params.chi]
    R = params.R
    if R < 2:
        raise PreconditionError(f"sieve level R = {R:.4g} must be at least 2")
    Np, W, b = params.N_prime, params.W, params.b
    D = int(math.floor(R))
    mu = mobius_up_to(D)
    s = np.zeros(Np + 1)
    logR = math.log(R)
    for d in range(1, D + 1):
        if mu[d] == 0 or math.gcd(d, W) != 1:
            continue  # b + W n is coprime to W
        # W n = -b (mod d)
        n0 = (-b * pow(W, -1, d)) % d if d > 1 else 0
        if n0 == 0:
            n0 = d
        s[n0::d] += mu[d] * float(chi(math.log(d) / logR))
    s[0] = 0.0
    return s


def gpy_majorant(params: SieveParams, floor: float = 0.5) -> Majorant:
    """nu = floor + (1 - floor) * normalised (phi(W)/W) log R * s(n)^2 on [N'].

    The squared sieve weight vanishes off [N']; it is rescaled so its mean
    over Z_M is exactly 1, so nu has mean 1 for any ``floor`` in [0, 1).
    """
    if not 0 <= floor < 1:
        raise ValueError("floor must lie in [0, 1)")
    s = truncated_divisor_sum(params)
    raw = np.zeros(params.M)
    raw[1:params.N_prime + 1] = params.phi_W / params.W * math.log(params.R) * s[1:] ** 2
    total = raw.sum()
    if total <= 0:
        raise ArithmeticError("sieve weight vanishes identically")
    scale = float(params.M / total)
    values = floor + (1 - floor) * raw * scale
    # exact mean: redistribute the rounding residue uniformly
    values = values - (values.sum() / params.M - 1.0)
    return Majorant(DensityFunction(np.maximum(values, 0.0)), raw, scale, floor)


def domination_ratio(lam: DensityFunction, nu: DensityFunction) -> float:
    """max lambda/nu over the support of lambda (inf if nu vanishes there)."""
    sup = lam.values > 0
    if not sup.any():
        return 0.0
    den = nu.values[sup]
    if np.any(den <= 0):
        return math.inf
    return float((lam.values[sup] / den).max())
