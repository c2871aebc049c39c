import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import measures, random_measure
from cxproj.errors import TimeNotGreaterThanOne
from cxproj.extrapolation import (
    extrapolate,
    extrapolate_reduction,
    extrapolation_functional,
    g_functional,
    quantile_extrapolation,
)
from cxproj.measures import measure, validate_normalize
from cxproj.ot_core import w2
from cxproj.quantile1d import QuantileFunction, common_refinement, quantile_of

times = st.sampled_from([1.25, 2.0, 5.0])


def test_fixed_point(rng):
    m = random_measure(rng, 2, 4)
    for t in (1.25, 2.0, 5.0):
        assert w2(extrapolate(m, m, t), m) <= 1e-9


def test_dirac_translation():
    out = extrapolate(measure([[0.0]]), measure([[1.0]]), 2.0)
    assert out.atoms.tolist() == [[2.0]]
    out = extrapolate(measure([[0.0, 0.0]]), measure([[1.0, 1.0]]), 2.0)
    np.testing.assert_allclose(out.atoms, [[2.0, 2.0]], atol=1e-12)


def test_pooled_example(sym2):
    # confirmed by oracle.brute_force_extrapolation
    out = extrapolate(sym2, measure([[0.0]]), 2.0)
    np.testing.assert_allclose(out.atoms, [[0.0]], atol=1e-15)
    out = extrapolate(sym2, measure([[0.0]]), 2.0, method="reduction")
    np.testing.assert_allclose(out.atoms, [[0.0]], atol=1e-12)


def test_frozen_2d_instance():
    # reference from oracle.brute_force_extrapolation; the minimizer has
    # rational atoms 1.8/7, 0.6 and so on
    nu0 = measure([[0.0, 0.0], [1.0, 0.0]], [0.5, 0.5])
    nu1 = measure([[0.2, 0.5], [0.8, -0.1], [0.3, 0.3]], [0.2, 0.3, 0.5])
    ref = measure([[1.8 / 7, 1.0], [0.6, -0.2], [1.8 / 7, 0.6]], [0.2, 0.3, 0.5])
    assert w2(extrapolate(nu0, nu1, 2.0), ref) <= 1e-9


def test_time_must_exceed_one(sym2):
    for t in (1.0, 0.5, -2.0):
        with pytest.raises(TimeNotGreaterThanOne):
            extrapolate(sym2, sym2, t)


def test_unknown_method(sym2):
    with pytest.raises(ValueError):
        extrapolate(sym2, sym2, 2.0, method="newton")


def test_functional_examples(sym2, rng):
    m = random_measure(rng, 1, 3)
    assert extrapolation_functional(m, m, m, 2.0) == 0.0
    other = random_measure(rng, 1, 4)
    assert extrapolation_functional(m, other, m, 3.0) == pytest.approx(-w2(m, other) ** 2 / 6)
    d0 = measure([[0.0]])
    assert extrapolation_functional(d0, sym2, d0, 2.0) == pytest.approx(-0.25)
    assert g_functional(d0, sym2, d0, 2.0) == pytest.approx(-0.5)
    assert g_functional(m, m, m, 2.0) == 0.0


@given(measures(dim=2, max_atoms=4), measures(dim=2, max_atoms=4), measures(dim=2, max_atoms=4), times)
def test_g_is_scaled_functional(rho, nu0, nu1, t):
    f = extrapolation_functional(rho, nu0, nu1, t)
    g = g_functional(rho, nu0, nu1, t)
    assert abs(g - t * (t - 1) * f) <= 1e-10 * (1 + abs(g))


@given(measures(max_atoms=5), measures(max_atoms=5), times)
def test_pav_and_reduction_agree(nu0, nu1, t):
    a = extrapolate(nu0, nu1, t, method="pav")
    b = extrapolate(nu0, nu1, t, method="reduction")
    assert w2(a, b) <= 1e-7 * (1 + w2(nu0, nu1))


@given(measures(dim=2, max_atoms=4), measures(dim=2, max_atoms=4), times)
def test_dissipative_bounds(nu0, nu1, t):
    e = extrapolate(nu0, nu1, t)
    d = w2(nu0, nu1)
    assert w2(nu0, e) <= t * d + 1e-8
    assert w2(nu1, e) <= (t - 1) * d + 1e-8


@given(measures(dim=2, max_atoms=4), measures(dim=2, max_atoms=4), times)
def test_geodesic_consistency(nu0, nu1, t):
    res = extrapolate_reduction(nu0, nu1, t)
    lhs = w2(nu1, res.extrapolated)
    rhs = (t - 1) * w2(res.start, nu1)
    assert abs(lhs - rhs) <= 1e-7 * (1 + rhs)


def test_minimality_against_candidates(rng):
    for dim in (1, 2):
        for t in (1.25, 2.0, 5.0):
            nu0, nu1 = random_measure(rng, dim, 3), random_measure(rng, dim, 4)
            e = extrapolate(nu0, nu1, t)
            best = extrapolation_functional(e, nu0, nu1, t)
            mean = e.weights @ e.atoms
            for k in range(100):
                if k % 2:
                    cand = validate_normalize(e.atoms + rng.normal(0, 0.05, e.atoms.shape), e.weights)
                else:
                    cand = random_measure(rng, dim, int(rng.integers(1, 6)))
                    cand = validate_normalize(cand.atoms - cand.weights @ cand.atoms + mean, cand.weights)
                assert best <= extrapolation_functional(cand, nu0, nu1, t) + 1e-7


@given(measures(max_atoms=5), measures(max_atoms=5), measures(max_atoms=5), times)
def test_strong_convexity_1d(nu0, nu1, rho, t):
    """Quantile form of the strong convexity inequality along the canonical coupling."""
    bp, y = quantile_extrapolation(nu0, nu1, t)
    ext = QuantileFunction(bp, y, False)
    f, r = common_refinement(ext, quantile_of(rho))
    gap = 0.5 * float(np.dot(f.widths, (f.values - r.values) ** 2))
    e = extrapolate(nu0, nu1, t)
    assert gap + g_functional(e, nu0, nu1, t) <= g_functional(rho, nu0, nu1, t) + 1e-7
