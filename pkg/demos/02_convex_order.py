"""
Deciding convex order
=====================

``mu`` is dominated by ``nu`` when every convex function integrates no
higher under ``mu``. The checker returns a martingale coupling when the
answer is yes and a convex witness function when it is no.
"""

import numpy as np

from cxproj import check_convex_order, measure, random_convex_witness_test
from cxproj.convex_order import random_dominated

spread = measure([[-1.0], [1.0]])
wide = measure([[-2.0], [2.0]])
point = measure([[0.0]])

print("delta_0 below spread:", check_convex_order(point, spread).verdict)

r = check_convex_order(spread, point)
print("spread below delta_0:", r.verdict, "witness gap", r.witness.gap)

r = check_convex_order(spread, wide, certificate=True)
print("spread below wide:", r.verdict)
print("martingale coupling:\n", r.certificate.plan)

# Random convex test functions can refute domination but never prove it.
rng = np.random.default_rng(1)
nu = measure(rng.uniform(-1, 1, (5, 2)), rng.dirichlet(np.ones(5)))
mu = random_dominated(nu, 3, rng)
print("2D dominated pair:", check_convex_order(mu, nu).verdict)
print("sampled witnesses:", random_convex_witness_test(mu, nu, count=300))
