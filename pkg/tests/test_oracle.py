import numpy as np
import pytest

from conftest import random_measure
from cxproj.convex_order import check_convex_order, random_dominated
from cxproj.errors import TooLarge
from cxproj.measures import measure
from cxproj.oracle import (
    brute_force_backward,
    brute_force_extrapolation,
    extrapolation_functional_vertices,
    grid_optimum,
    w2_squared_vertices,
)
from cxproj.ot_core import w2, w2_lp


def test_backward_examples(sym2):
    np.testing.assert_allclose(brute_force_backward(measure([[5.0]]), sym2).atoms, [[0.0]], atol=1e-12)
    out = brute_force_backward(measure([[-2.0], [2.0]]), sym2)
    assert w2(out, sym2) <= 1e-12


def test_backward_feasible_input(rng):
    nu = random_measure(rng, 2, 3)
    mu = random_dominated(nu, 3, rng)
    assert w2(brute_force_backward(mu, nu), mu) <= 1e-6


def test_backward_outputs_feasible(rng):
    for _ in range(20):
        mu, nu = random_measure(rng, 2, 3), random_measure(rng, 2, 3)
        assert check_convex_order(brute_force_backward(mu, nu), nu, 1e-6).dominated


def test_backward_size_guard(rng):
    with pytest.raises(TooLarge):
        brute_force_backward(random_measure(rng, 1, 4), random_measure(rng, 1, 3))


def test_grid_refinement_converges(rng):
    """Nested grids (2^k + 1 points) can only improve, and they approach the exact face solve.

    A per-step shrinking of the changes is not guaranteed: when the optimum
    sits near a node shared by two grids, one doubling changes nothing and
    the next does.
    """
    for _ in range(10):
        mu, nu = random_measure(rng, 2, 2), random_measure(rng, 2, 3)
        vals = np.array([grid_optimum(mu, nu, 2**k + 1) for k in range(2, 9)])
        assert np.all(np.diff(vals) <= 1e-15)
        exact = w2(mu, brute_force_backward(mu, nu)) ** 2
        assert vals[-1] >= exact - 1e-12
        # the grid step shrinks 64-fold; the error shrinks at least linearly
        assert vals[-1] - exact <= (4 / 64) * (vals[0] - exact) + 1e-12


def test_vertex_w2_matches_lp(rng):
    for _ in range(30):
        a = random_measure(rng, 2, int(rng.integers(1, 4)))
        b = random_measure(rng, 2, int(rng.integers(1, 4)))
        assert w2_squared_vertices(a, b) == pytest.approx(w2_lp(a, b)[0] ** 2, abs=1e-12)


def test_extrapolation_examples(sym2):
    m = measure([[0.3], [-0.4]], [0.6, 0.4])
    assert w2(brute_force_extrapolation(m, m, 2.0), m) <= 1e-6
    out = brute_force_extrapolation(sym2, measure([[0.0]]), 2.0)
    np.testing.assert_allclose(out.atoms, [[0.0]], atol=1e-6)


def test_extrapolation_value_is_minimal(rng):
    nu0, nu1 = random_measure(rng, 2, 2), random_measure(rng, 2, 3)
    out = brute_force_extrapolation(nu0, nu1, 2.0)
    best = extrapolation_functional_vertices(out, nu0, nu1, 2.0)
    for _ in range(50):
        cand = measure(out.atoms + rng.normal(0, 0.05, out.atoms.shape), out.weights)
        assert best <= extrapolation_functional_vertices(cand, nu0, nu1, 2.0) + 1e-9


def test_extrapolation_size_guard(rng):
    with pytest.raises(TooLarge):
        brute_force_extrapolation(random_measure(rng, 1, 2), random_measure(rng, 1, 4), 2.0)
