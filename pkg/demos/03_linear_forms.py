"""
Measuring the linear forms condition
====================================

delta is the largest deviation from 1 over all products of the weight
evaluated on the linear forms. For k = 3 there are 2^12 patterns and every
one is computed exactly.
"""

import numpy as np

from relsz.pseudo import lfc_delta, uniformity_from_lfc
from relsz.zcore import DensityFunction

# the constant weight is perfectly pseudorandom
print(lfc_delta(DensityFunction.constant(5), 3).delta)

# a noisy weight of mean one: delta grows with the noise
rng = np.random.default_rng(0)
u = rng.random(5)
for spread in (0.05, 0.2, 0.5, 1.0):
    nu = DensityFunction(1 + spread * (u - u.mean()))
    rep = lfc_delta(nu, 3)
    unif = uniformity_from_lfc(nu, 3, report=rep)
    print(f"spread={spread:4.2f}  delta={rep.delta:.5f}  cut={unif.cut_norm:.5f}  "
          f"U={unif.u_norm:.5f}  bound={unif.bound:.5f}")
