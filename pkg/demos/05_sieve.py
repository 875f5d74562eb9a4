"""
W-trick and a sieve majorant
============================

Primes b + W n in one residue class, the weight lambda on Z_M and a
truncated divisor sum majorant normalised to mean one.
"""

import numpy as np

from relsz.sieve import (choose_residue, domination_ratio, gpy_majorant, lambda_weight, primes_up_to,
                         w_trick_params)

print(primes_up_to(30))

for N in (10 ** 3, 10 ** 4, 10 ** 6):
    p = w_trick_params(N)
    print(f"N'={N:>8}  omega={p.omega:.3f}  W={p.W}  phi(W)={p.phi_W}  M={p.M}")

p = w_trick_params(5000, gamma=0.2)
b, count = choose_residue(p)
p = p.with_residue(b)
print("residue", b, "holds", count, "primes b + W n with n <= N'")

nu = gpy_majorant(p)
lam = lambda_weight(p)
print("mean nu =", nu.nu.values.mean(), " mean lambda =", lam.values.mean())
print("max lambda/nu on the primes:", round(domination_ratio(lam, nu.nu), 3))
print("the majorant is a stand-in: it does not dominate lambda, and the ratio is reported")
