"""
Metric extrapolation
====================

Continue the geodesic from ``nu0`` through ``nu1`` to time ``t > 1``. In
1D this is isotonic regression of ``t X1 + (1 - t) X0``; in any dimension
it reduces to one backward projection of a dilated ``nu1``.
"""

import numpy as np

from cxproj import extrapolate, extrapolation_functional, measure, w2
from cxproj.oracle import brute_force_extrapolation

# Diracs move along straight lines.
print(extrapolate(measure([[0.0]]), measure([[1.0]]), 2.0))

# Shrinking a spread measure to a point cannot be continued past the point.
print(extrapolate(measure([[-1.0], [1.0]]), measure([[0.0]]), 2.0))

rng = np.random.default_rng(7)
nu0 = measure(rng.uniform(-1, 1, (3, 2)), rng.dirichlet(np.ones(3)))
nu1 = measure(rng.uniform(-1, 1, (3, 2)), rng.dirichlet(np.ones(3)))
for t in (1.25, 2.0, 5.0):
    e = extrapolate(nu0, nu1, t)
    o = brute_force_extrapolation(nu0, nu1, t)
    print(
        f"t={t}: functional {extrapolation_functional(e, nu0, nu1, t):.6f}, "
        f"distance to oracle {w2(e, o):.2e}, "
        f"W2(nu1, E)/W2(nu0, nu1) = {w2(nu1, e) / w2(nu0, nu1):.3f} (at most t-1)"
    )

# The two 1D routes agree.
a = measure(rng.normal(size=(5, 1)))
b = measure(rng.normal(size=(4, 1)))
print("PAV vs reduction:", w2(extrapolate(a, b, 3.0, method="pav"), extrapolate(a, b, 3.0, method="reduction")))
