"""
Backward projection
===================

The closest measure to ``mu`` among those dominated by ``nu``. Every atom
of ``mu`` moves to the mean of the mass it receives under an optimal
coupling, found by Frank-Wolfe with away steps over the transport polytope.
"""

import numpy as np

from cxproj import backward_project, backward_project_1d, check_convex_order, measure, w2
from cxproj.oracle import brute_force_backward

nu = measure([[-1.0], [1.0]])
for mu in (measure([[5.0]]), measure([[-2.0], [2.0]]), measure([[0.0]])):
    sol = backward_project(mu, nu)
    print(f"{mu} -> {sol.projected}, objective {sol.objective:.6g}")

# 1D closed form through isotonic regression agrees with the solver.
rng = np.random.default_rng(4)
mu = measure(rng.uniform(-1, 1, (6, 1)), rng.dirichlet(np.ones(6)))
nu = measure(rng.uniform(-1, 1, (5, 1)), rng.dirichlet(np.ones(5)))
print("1D solver vs closed form:", w2(backward_project(mu, nu).projected, backward_project_1d(mu, nu)))

# 2D instance against the brute-force oracle.
mu = measure(rng.uniform(-1, 1, (3, 2)), rng.dirichlet(np.ones(3)))
nu = measure(rng.uniform(-1, 1, (3, 2)), rng.dirichlet(np.ones(3)))
sol = backward_project(mu, nu)
print("iterations", sol.iterations, "gap", sol.fw_gap)
print("distance to oracle:", w2(sol.projected, brute_force_backward(mu, nu)))
print("output dominated:", check_convex_order(sol.projected, nu).verdict)
