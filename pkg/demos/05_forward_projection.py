"""
Forward projection
==================

The closest measure to ``nu`` among those dominating ``mu``, computed by
extrapolating from ``nu`` through a shrunken copy of ``mu`` and dilating
a point of the resulting geodesic back.
"""

import numpy as np

from cxproj import SolverConfig, backward_project, check_convex_order, forward_project, measure, w2

print(forward_project(measure([[0.0]]), measure([[-1.0], [1.0]])))
print(forward_project(measure([[-1.0], [1.0]]), measure([[0.0]])))

rng = np.random.default_rng(2)
for dim in (1, 2):
    mu = measure(rng.uniform(-1, 1, (4, dim)), rng.dirichlet(np.ones(4)))
    nu = measure(rng.uniform(-1, 1, (5, dim)), rng.dirichlet(np.ones(5)))
    out = forward_project(mu, nu)
    alt = forward_project(mu, nu, SolverConfig(t_pipeline=5.0))
    print(f"dim {dim}: mu dominated by output: {check_convex_order(mu, out).verdict}")
    print(f"  W2(nu, forward) = {w2(nu, out):.6f}, W2(mu, backward) = {w2(mu, backward_project(mu, nu).projected):.6f}")
    print(f"  t=2 vs t=5 outputs differ by {w2(out, alt):.2e}")
