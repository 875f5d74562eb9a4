"""
Cut norm and Gowers norm of small functions
===========================================

For a mean-zero function on Z_N the cut norm of its progression
hypergraph never exceeds its Gowers norm.
"""

import numpy as np

from relsz.norms import cut_norm_arithmetic, gowers_norm_arithmetic

rng = np.random.default_rng(1)
for N in (5, 7, 11):
    f = rng.random(N)
    f -= f.mean()
    cut = cut_norm_arithmetic(f, 2, restarts=64, seed=0)
    gn = gowers_norm_arithmetic(f, 2)
    print(f"N={N:2d}  cut={cut.value:.5f} (exact={cut.exact})  U2={gn.value:.5f}")

# a cosine has two Fourier coefficients of size 1/2, so U2^4 = 2/16
N = 8
chi = np.cos(2 * np.pi * np.arange(N) / N)
print("U2 of a cosine:", gowers_norm_arithmetic(chi, 2).value, (2 / 16) ** 0.25)
