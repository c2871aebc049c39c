import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from cxproj.measures import measure

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@st.composite
def measures(draw, dim=1, min_atoms=1, max_atoms=5, scale=2.0):
    """Random discrete measure with atoms in ``[-scale, scale]^dim``."""
    n = draw(st.integers(min_atoms, max_atoms))
    coords = st.floats(-scale, scale, allow_nan=False, allow_infinity=False, width=64)
    atoms = draw(st.lists(st.lists(coords, min_size=dim, max_size=dim), min_size=n, max_size=n))
    weights = draw(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n))
    return measure(np.array(atoms, dtype=float), np.array(weights))


def random_measure(rng, dim, n, scale=1.0):
    return measure(rng.uniform(-scale, scale, (n, dim)), rng.dirichlet(np.ones(n)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def sym2():
    """Half mass at -1 and half at +1."""
    return measure([[-1.0], [1.0]])


def same_measure(a, b, atol=1e-9, wtol=1e-12):
    """Atoms of ``a`` within ``atol`` of atoms of ``b`` and grouped weights within ``wtol``.

    W2 itself cannot resolve agreement finer than the square root of the
    weight rounding error, so exact-output properties compare structurally.
    """
    d = np.sqrt(((a.atoms[:, None, :] - b.atoms[None, :, :]) ** 2).sum(-1))
    if np.any(d.min(axis=1) > atol) or np.any(d.min(axis=0) > atol):
        return False
    # group atoms of b that lie within atol of each other, then compare mass
    labels = np.arange(b.n)
    for i in range(b.n):
        for j in range(i):
            if np.linalg.norm(b.atoms[i] - b.atoms[j]) <= 2 * atol:
                labels[labels == labels[i]] = labels[j]
    near = d.argmin(axis=1)
    mass_a = np.zeros(b.n)
    np.add.at(mass_a, labels[near], a.weights)
    mass_b = np.zeros(b.n)
    np.add.at(mass_b, labels, b.weights)
    return bool(np.max(np.abs(mass_a - mass_b)) <= wtol)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
