import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from conftest import measures, random_measure
from cxproj.errors import DimensionMismatch, SizeLimitExceeded
from cxproj.measures import measure
from cxproj.ot_core import (
    TransportSimplex,
    barycentric_images,
    barycentric_map,
    certify_optimal,
    geodesic_point,
    sqdist,
    w2,
    w2_lp,
)
from cxproj.quantile1d import w2_1d


def highs_cost(mu, nu):
    """Transport LP value from a generic LP solver, as a cross-check."""
    n, m = mu.n, nu.n
    C = ((mu.atoms[:, None, :] - nu.atoms[None, :, :]) ** 2).sum(-1)
    A = np.zeros((n + m, n * m))
    for i in range(n):
        A[i, i * m : (i + 1) * m] = 1
    for j in range(m):
        A[n + j, j::m] = 1
    res = linprog(C.ravel(), A_eq=A, b_eq=np.concatenate([mu.weights, nu.weights]), method="highs")
    return res.fun


def test_w2_lp_examples():
    d, c = w2_lp(measure([[0.0, 0.0]]), measure([[3.0, 4.0]]))
    assert d == 5.0
    m = measure([[0.0, 1.0], [2.0, -1.0], [0.5, 0.5]], [0.2, 0.5, 0.3])
    d, c = w2_lp(m, m)
    assert d == 0.0
    np.testing.assert_allclose(c.plan, np.diag(m.weights), atol=1e-15)
    # frozen: the two permutation plans cost 1 and 3
    d, _ = w2_lp(measure([[0.0, 0.0], [1.0, 0.0]]), measure([[0.0, 1.0], [1.0, 1.0]]))
    assert d == pytest.approx(1.0, abs=1e-15)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        w2_lp(measure([[0.0]]), measure([[0.0, 1.0]]))


def test_size_limit():
    with pytest.raises(SizeLimitExceeded):
        TransportSimplex(np.full(201, 1 / 201), np.full(201, 1 / 201))


def test_sqdist_compensated():
    x = np.array([[1e8, 1.0, -1e8]])
    y = np.array([[1e8, 0.0, -1e8]])
    assert sqdist(x, y)[0, 0] == 1.0


@given(measures(dim=2, max_atoms=6), measures(dim=2, max_atoms=6))
def test_lp_matches_generic_solver(a, b):
    d, c = w2_lp(a, b)
    assert c.check(1e-10)
    assert abs(d * d - highs_cost(a, b)) <= 1e-9 * (1 + d * d)
    assert np.count_nonzero(c.plan > 0) <= a.n + b.n - 1


@given(measures(dim=3, max_atoms=7), measures(dim=3, max_atoms=7))
def test_complementary_slackness(a, b):
    _, c = w2_lp(a, b)
    assert certify_optimal(c, 1e-9)


@given(measures(max_atoms=7), measures(max_atoms=7))
def test_lp_matches_quantile_formula(a, b):
    d1, _ = w2_lp(a, b)
    d2 = w2_1d(a, b)
    assert abs(d1 - d2) <= 1e-9 * max(d1, d2, 1e-12) + 1e-12


def test_w2_dispatch(rng):
    a, b = random_measure(rng, 1, 4), random_measure(rng, 1, 5)
    assert w2(a, b) == w2_1d(a, b)


def test_larger_instance_against_generic_solver(rng):
    a, b = random_measure(rng, 2, 40), random_measure(rng, 2, 35)
    d, c = w2_lp(a, b)
    assert c.check(1e-10)
    assert abs(d * d - highs_cost(a, b)) <= 1e-9


def test_barycentric_examples():
    m = measure([[0.0], [1.0]])
    _, c = w2_lp(m, m)
    np.testing.assert_allclose(barycentric_map(c).images, m.atoms)
    nu = measure([[-1.0], [3.0]], [0.75, 0.25])
    prod = np.outer(m.weights, nu.weights)
    z = barycentric_images(prod, m.weights, nu.atoms)
    np.testing.assert_allclose(z.ravel(), [0.0, 0.0])
    plan = np.array([[0.25, 0.25], [0.0, 0.5]])
    z = barycentric_images(plan, [0.5, 0.5], np.array([[-1.0], [1.0]]))
    np.testing.assert_allclose(z.ravel(), [0.0, 1.0])


@given(measures(dim=2), measures(dim=2))
def test_barycentric_mean_preserved(a, b):
    _, c = w2_lp(a, b)
    z = barycentric_map(c).images
    np.testing.assert_allclose(a.weights @ z, b.weights @ b.atoms, atol=1e-10)


def test_geodesic_examples():
    a = measure([[0.0, 1.0], [2.0, 0.0]], [0.4, 0.6])
    b = measure([[1.0, 1.0], [-1.0, 3.0], [0.0, 0.0]])
    assert w2(geodesic_point(a, b, 0.0), a) <= 1e-10
    assert w2(geodesic_point(a, b, 1.0), b) <= 1e-10
    g = geodesic_point(measure([[0.0]]), measure([[4.0]]), 0.25)
    assert g.atoms.tolist() == [[1.0]]


@given(
    measures(dim=2, max_atoms=4),
    measures(dim=2, max_atoms=4),
    st.floats(0, 1),
    st.floats(0, 1),
)
def test_geodesic_constant_speed(a, b, s1, s2):
    d, c = w2_lp(a, b)
    g1 = geodesic_point(a, b, s1, c)
    g2 = geodesic_point(a, b, s2, c)
    assert math.isclose(w2(g1, g2), abs(s1 - s2) * d, rel_tol=1e-9, abs_tol=1e-9)
