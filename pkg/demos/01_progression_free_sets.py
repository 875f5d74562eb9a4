"""
Largest progression-free subsets of [N]
=======================================

Exact values of r_k(N) by branch and bound, checked against brute force.
"""

import numpy as np

from relsz.oracles import rk_enumerate
from relsz.zcore import alpha_inverse, ap_count, extremal_csv, has_k_ap, rk_table

# r_3(N) for N up to 24, each with a witness set
table = rk_table(24, 3)
for rec in table[-4:]:
    print(rec.N, rec.r_value, rec.witness, "AP-free:", not has_k_ap(rec.witness, 3))

# the same numbers from plain subset enumeration (slow, so stop at 18)
print([r.r_value for r in table[:18]] == rk_enumerate(18, 3))

# the table as CSV, the format the batch runner writes
print(extremal_csv(table[:10]))

# smallest N whose density alpha_3(N) drops to at most 0.6
print("alpha_3^{-1}(0.6) =", alpha_inverse(0.6, 3, 24))

# counting 3-APs in Z_N includes the d = 0 terms, so the count of 1_A is |A|/N^2 at least
N = 11
A = np.zeros(N)
A[[0, 1, 3, 4]] = 1
print(ap_count(A, 3), 4 / N ** 2)
