import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import measures, random_measure, same_measure
from cxproj.convex_order import check_convex_order, random_dominated
from cxproj.errors import ConfigError, MaxItersExceeded, TimeNotGreaterThanOne
from cxproj.measures import measure
from cxproj.ot_core import w2
from cxproj.projections import (
    SolverConfig,
    backward_project,
    backward_project_1d,
    forward_project,
    forward_project_1d,
)


# --------------------------------------------------------------------------
# backward
# --------------------------------------------------------------------------


def test_feasible_input_is_returned(sym2):
    sol = backward_project(measure([[0.0]]), sym2)
    assert sol.projected.atoms.tolist() == [[0.0]]
    assert sol.objective == pytest.approx(0.0, abs=1e-15)


def test_far_dirac_goes_to_mean(sym2):
    sol = backward_project(measure([[5.0]]), sym2)
    np.testing.assert_allclose(sol.projected.atoms, [[0.0]], atol=1e-12)
    assert sol.objective == pytest.approx(25.0)


def test_wider_measure_projects_onto_target(sym2):
    sol = backward_project(measure([[-2.0], [2.0]]), sym2)
    assert w2(sol.projected, sym2) <= 1e-12
    assert sol.objective == pytest.approx(1.0)


def test_frozen_2d_instance():
    # reference atoms from oracle.brute_force_backward on this instance
    mu = measure([[0.0, 2.0], [1.0, -1.0]], [0.3, 0.7])
    nu = measure([[-1.0, 0.0], [1.0, 1.0], [0.0, -2.0]], [0.5, 0.25, 0.25])
    ref = measure([[-0.22, 0.39], [-1.84 / 7, -3.67 / 7]], [0.3, 0.7])
    sol = backward_project(mu, nu)
    assert w2(sol.projected, ref) <= 1e-9
    assert sol.converged and sol.fw_gap <= 1e-9


@given(measures(dim=2, max_atoms=5), measures(dim=2, max_atoms=5))
def test_backward_output_is_dominated(mu, nu):
    sol = backward_project(mu, nu)
    assert sol.plan.check(1e-9)
    assert check_convex_order(sol.projected, nu, 1e-8).dominated


def test_backward_beats_random_feasible_candidates(rng):
    for _ in range(5):
        mu = random_measure(rng, 2, 4)
        nu = random_measure(rng, 2, 5)
        best = w2(mu, backward_project(mu, nu).projected)
        for _ in range(100):
            cand = random_dominated(nu, int(rng.integers(1, 6)), rng)
            assert best <= w2(mu, cand) + 1e-7


@given(measures(max_atoms=5), measures(max_atoms=5))
def test_backward_matches_1d(mu, nu):
    assert w2(backward_project(mu, nu).projected, backward_project_1d(mu, nu)) <= 1e-7


@given(measures(max_atoms=6), measures(max_atoms=6))
def test_1d_chain_is_t_free(mu, nu):
    direct = backward_project_1d(mu, nu)
    for t in (2.0, 10.0):
        assert w2(direct, backward_project_1d(mu, nu, t)) <= 1e-12 * (1 + w2(mu, nu))


def test_1d_examples(sym2):
    assert w2(backward_project_1d(measure([[0.0]]), sym2), measure([[0.0]])) == 0.0
    out = backward_project_1d(measure([[-2.0], [2.0]]), sym2)
    assert w2(out, sym2) <= 1e-15
    with pytest.raises(TimeNotGreaterThanOne):
        backward_project_1d(sym2, sym2, t=1.0)


@given(measures(dim=2, max_atoms=4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_backward_idempotent_on_feasible(nu, k, seed):
    mu = random_dominated(nu, k, np.random.default_rng(seed))
    assert same_measure(backward_project(mu, nu).projected, mu)


def test_strict_mode_raises():
    rng = np.random.default_rng(3)
    mu, nu = random_measure(rng, 2, 8), random_measure(rng, 2, 8)
    cfg = SolverConfig(max_iters=1, fw_gap_tol=1e-15, strict=True, refine=False, polish_every=10)
    with pytest.raises(MaxItersExceeded):
        backward_project(mu, nu, cfg)
    sol = backward_project(mu, nu, SolverConfig(max_iters=1, fw_gap_tol=1e-15, refine=False, polish_every=10))
    assert not sol.converged


@pytest.mark.parametrize(
    "kwargs",
    [{"fw_gap_tol": 0.0}, {"t_pipeline": 1.0}, {"max_iters": 0}, {"forward_map": "nope"}],
)
def test_config_validation(kwargs):
    with pytest.raises(ConfigError):
        SolverConfig(**kwargs)


# --------------------------------------------------------------------------
# forward
# --------------------------------------------------------------------------


def test_forward_examples(sym2):
    assert w2(forward_project(measure([[0.0]]), sym2), sym2) <= 1e-12
    assert w2(forward_project(sym2, measure([[0.0]])), sym2) <= 1e-12
    assert w2(forward_project_1d(measure([[0.0]]), sym2), sym2) == 0.0
    assert w2(forward_project_1d(sym2, measure([[0.0]])), sym2) == 0.0


@given(measures(max_atoms=6), measures(max_atoms=6))
def test_forward_1d_dominates_and_matches(mu, nu):
    out = forward_project(mu, nu)
    assert check_convex_order(mu, out, 1e-8).dominated
    assert w2(out, forward_project_1d(mu, nu)) <= 1e-9 * (1 + w2(mu, nu))


@given(measures(max_atoms=6), measures(max_atoms=6))
def test_forward_t_invariance_1d(mu, nu):
    a = forward_project(mu, nu, SolverConfig(t_pipeline=2.0))
    b = forward_project(mu, nu, SolverConfig(t_pipeline=5.0))
    assert w2(a, b) <= 1e-7 * (1 + w2(mu, nu))


@given(measures(dim=2, max_atoms=4), measures(dim=2, max_atoms=4))
def test_forward_2d_dominates(mu, nu):
    out = forward_project(mu, nu)
    assert check_convex_order(mu, out, 1e-8).dominated


@given(measures(dim=2, max_atoms=4), measures(dim=2, max_atoms=4))
def test_forward_distance_equals_backward_distance(mu, nu):
    # the projections are dilations of points on one geodesic, so the two
    # projection distances coincide
    fwd = forward_project(mu, nu)
    bwd = backward_project(mu, nu).projected
    assert abs(w2(nu, fwd) - w2(mu, bwd)) <= 1e-7 * (1 + w2(mu, nu))


@given(measures(dim=2, max_atoms=4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_forward_idempotent_on_feasible(nu, k, seed):
    mu = random_dominated(nu, k, np.random.default_rng(seed))
    assert same_measure(forward_project(mu, nu), nu)


@pytest.mark.parametrize("mode", ["lp", "barycentric"])
def test_alternative_forward_maps_run(mode, rng):
    mu, nu = random_measure(rng, 2, 4), random_measure(rng, 2, 4)
    out = forward_project(mu, nu, SolverConfig(forward_map=mode))
    assert out.dim == 2
