"""
Counting lemmas with explicit constants
=======================================

Dense case: the difference of clique densities of two [0,1]-weighted
hypergraphs is at most k times their cut distance. Relative case: every
step of the chain is checked with the measured delta.
"""

import numpy as np

from relsz.counting import dense_counting_gap, dense_model_greedy, dense_model_verify, relative_counting_gap
from relsz.hypergraph import WeightedHypergraph
from relsz.suites import seeded_nu, seeded_triple

rng = np.random.default_rng(3)
g = WeightedHypergraph.random(3, 6, rng)
gt = WeightedHypergraph.random(3, 6, rng)
res = dense_counting_gap(g, gt)
print(f"gap={res.gap:.5f}  k*eps={res.bound:.5f}  exact cut={res.exact}")

nu, g, gt = seeded_triple(5, 0)
diag = relative_counting_gap(g, gt, nu)
print("relative chain:", diag.all_checks_pass, f"gap={diag.gap:.5f}")

# a [0,1]-valued dense model for f = 2 nu * mask, which exceeds 1
nu = seeded_nu(8, 4, 0.3)
f = 2 * nu.values * (np.random.default_rng(4).random(8) < 0.5)
model = dense_model_greedy(f, 3)
chk = dense_model_verify(f, model.model, 3, 0.05 if model.converged else model.distance)
print(np.round(f, 3))
print(np.round(model.model.values, 3), "rounds:", model.rounds, "distance:", round(chk.distance, 5))

# distance of each round's model; capping at 1 can make finer models worse,
# and the greedy keeps the best one
print([round(d, 5) for _, d in model.history])
