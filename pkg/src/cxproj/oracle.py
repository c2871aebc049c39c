"""Brute-force reference solvers for tiny instances.

These are deliberately slow and share no machinery with the production
solvers: no network simplex, no Frank-Wolfe, no isotonic regression.

* :func:`brute_force_backward` parameterizes couplings by their free entries,
  scans a grid (refined by zooming around the incumbent), then solves the
  quadratic exactly on every face of the free-variable polytope.
* :func:`brute_force_extrapolation` minimizes the extrapolation functional
  over atom locations by multi-start descent followed by an exact min-max
  refinement per vertex plan, with W2 evaluated through an explicit list of
  transportation polytope vertices.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .errors import TooLarge
from .measures import DiscreteMeasure, same_dim, validate_normalize

# --------------------------------------------------------------------------
# backward projection
# --------------------------------------------------------------------------

MAX_BACKWARD_CELLS = 9


class _FreeCoupling:
    """Couplings of ``a`` and ``b`` as affine functions of the top-left block.

    ``P = base + sum_k w_k * basis[k]`` with ``w`` the entries
    ``P[i, j]`` for ``i < n-1, j < m-1``.
    """

    def __init__(self, a, b):
        n, m = len(a), len(b)
        self.n, self.m = n, m
        self.dof = (n - 1) * (m - 1)
        base = np.zeros((n, m))
        # with the free block at zero, the last row and column carry the mass
        base[: n - 1, m - 1] = a[: n - 1]
        base[n - 1, : m - 1] = b[: m - 1]
        base[n - 1, m - 1] = 1.0 - a[: n - 1].sum() - b[: m - 1].sum()
        self.base = base
        basis = np.zeros((self.dof, n, m))
        for k, (i, j) in enumerate(itertools.product(range(n - 1), range(m - 1))):
            basis[k, i, j] = 1.0
            basis[k, i, m - 1] = -1.0
            basis[k, n - 1, j] = -1.0
            basis[k, n - 1, m - 1] = 1.0
        self.basis = basis
        self.upper = np.array(
            [min(a[i], b[j]) for i, j in itertools.product(range(n - 1), range(m - 1))]
        )

    def plans(self, W):
        """Plans for a batch of free vectors ``W`` with shape ``(G, dof)``."""
        return self.base[None] + np.tensordot(W, self.basis, axes=(1, 0))


def _weak_objective(plans, a, x, y):
    """Sum over i of ``a_i |x_i - z_i|^2`` for a batch of plans."""
    z = np.einsum("gij,jk->gik", plans, y) / a[None, :, None]
    diff = x[None] - z
    return np.einsum("i,gik,gik->g", a, diff, diff)


def _grid_search(fc, a, x, y, points, levels):
    dof = fc.dof
    lo = np.zeros(dof)
    hi = fc.upper.copy()
    best_w, best_v = None, math.inf
    for _ in range(levels):
        axes = [np.linspace(lo[k], hi[k], points) for k in range(dof)]
        W = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dof)
        P = fc.plans(W)
        feasible = np.all(P >= -1e-15, axis=(1, 2))
        if np.any(feasible):
            vals = _weak_objective(P[feasible], a, x, y)
            k = int(np.argmin(vals))
            if vals[k] < best_v:
                best_v, best_w = float(vals[k]), W[feasible][k]
        if best_w is None:
            break
        # zoom: keep four grid cells around the incumbent
        half = 2.0 * (hi - lo) / max(points - 1, 1)
        lo = np.maximum(best_w - half, 0.0)
        hi = np.minimum(best_w + half, fc.upper)
    return best_w, best_v


def _quadratic_model(fc, a, x, y):
    """Exact quadratic ``V(w) = w'Hw + g'w + c`` by finite differences.

    ``V`` is quadratic in ``w`` so central differences with unit steps are
    exact up to rounding.
    """
    dof = fc.dof
    f = lambda W: _weak_objective(fc.plans(np.atleast_2d(W)), a, x, y)
    c = float(f(np.zeros(dof))[0])
    E = np.eye(dof)
    fp = f(E)
    fm = f(-E)
    g = (fp - fm) / 2.0
    diag = (fp + fm - 2.0 * c) / 2.0
    H = np.diag(diag)
    for i, j in itertools.combinations(range(dof), 2):
        fij = float(f(E[i] + E[j])[0])
        H[i, j] = H[j, i] = (fij - fp[i] - fp[j] + c) / 2.0
    return H, g, c


def _face_enumeration(fc, H, g, c):
    """Minimize the quadratic over ``{w : P(w) >= 0}`` by trying every face.

    Each face fixes a subset of plan entries to zero; the stationary point of
    the quadratic on that affine set is found by a KKT solve and kept if it
    is feasible.
    """
    dof = fc.dof
    # plan entries as affine functions of w: entry(w) = e0 + Ew
    e0 = fc.base.ravel()
    E = fc.basis.reshape(dof, -1).T
    ncell = e0.size
    best_w, best_v = None, math.inf
    for r in range(0, ncell + 1):
        for active in itertools.combinations(range(ncell), r):
            A = E[list(active)]
            rhs = -e0[list(active)]
            k = len(active)
            K = np.zeros((dof + k, dof + k))
            K[:dof, :dof] = 2.0 * H
            K[:dof, dof:] = A.T
            K[dof:, :dof] = A
            sol, *_ = np.linalg.lstsq(K, np.concatenate([-g, rhs]), rcond=None)
            w = sol[:dof]
            if k and np.max(np.abs(A @ w - rhs)) > 1e-12:
                continue
            if np.min(e0 + E @ w) < -1e-12:
                continue
            v = float(w @ H @ w + g @ w + c)
            if v < best_v:
                best_v, best_w = v, w
    return best_w, best_v


def brute_force_backward(
    mu: DiscreteMeasure, nu: DiscreteMeasure, points: int = None, levels: int = 6
) -> DiscreteMeasure:
    """Closest measure to ``mu`` dominated by ``nu``, by exhaustive search.

    Parameters
    ----------
    points : int, optional
        Grid points per free variable and zoom level. The default keeps each
        level near 10^5 plan evaluations; ``levels`` zooms multiply the
        effective resolution.
    """
    same_dim(mu, nu)
    a, x = mu.weights, mu.atoms
    b, y = nu.weights, nu.atoms
    if mu.n * nu.n > MAX_BACKWARD_CELLS:
        raise TooLarge(f"oracle handles at most {MAX_BACKWARD_CELLS} plan cells")
    fc = _FreeCoupling(a, b)
    if fc.dof == 0:
        plan = fc.base
    else:
        if points is None:
            points = {1: 201, 2: 201, 3: 41, 4: 17}[fc.dof]
        w_grid, v_grid = _grid_search(fc, a, x, y, points, levels)
        H, g, c = _quadratic_model(fc, a, x, y)
        w_face, v_face = _face_enumeration(fc, H, g, c)
        w = w_face if w_face is not None and v_face <= v_grid else w_grid
        plan = np.maximum(fc.plans(w[None])[0], 0.0)
    z = (plan @ y) / a[:, None]
    return validate_normalize(z, a)


def grid_optimum(mu, nu, points, levels=1) -> float:
    """Weak-transport optimum found by the grid scan alone."""
    fc = _FreeCoupling(mu.weights, nu.weights)
    if fc.dof == 0:
        return float(_weak_objective(fc.base[None], mu.weights, mu.atoms, nu.atoms)[0])
    return _grid_search(fc, mu.weights, mu.atoms, nu.atoms, points, levels)[1]


# --------------------------------------------------------------------------
# W2 by vertex enumeration
# --------------------------------------------------------------------------


@lru_cache(maxsize=4096)
def _vertices(a: tuple, b: tuple):
    """All vertices of the transportation polytope with marginals ``a``, ``b``.

    Every vertex is the unique solution supported on some set of
    ``n + m - 1`` cells; all such cell sets are tried.
    """
    a = np.array(a)
    b = np.array(b)
    n, m = len(a), len(b)
    ncell = n * m
    A = np.zeros((n + m, ncell))
    for i in range(n):
        for j in range(m):
            A[i, i * m + j] = 1.0
            A[n + j, i * m + j] = 1.0
    rhs = np.concatenate([a, b])
    found = []
    for cells in itertools.combinations(range(ncell), n + m - 1):
        sub = A[:, cells]
        sol, _, rank, _ = np.linalg.lstsq(sub, rhs, rcond=None)
        if rank < n + m - 1 or np.max(np.abs(sub @ sol - rhs)) > 1e-12:
            continue
        if np.min(sol) < -1e-14:
            continue
        P = np.zeros(ncell)
        P[list(cells)] = np.maximum(sol, 0.0)
        found.append(P)
    V = np.unique(np.round(np.array(found), 14), axis=0)
    return V


def w2_squared_vertices(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    V = _vertices(tuple(mu.weights), tuple(nu.weights))
    C = ((mu.atoms[:, None, :] - nu.atoms[None, :, :]) ** 2).sum(-1).ravel()
    return float(np.min(V @ C))


# --------------------------------------------------------------------------
# extrapolation
# --------------------------------------------------------------------------

MAX_EXTRAPOLATION_ATOMS = 3


def _minmax_refine(p0, plan1, V0, b, x1, y0, t):
    """Minimize ``max_v F_v(p)`` for one fixed plan towards ``nu1``.

    With the plan towards ``nu1`` frozen, every plan ``v`` towards ``nu0``
    gives a quadratic ``F_v`` in the atom locations ``p``, and all of them
    share the Hessian ``b_i / (t (t-1))``. Their maximum is therefore
    strongly convex, and the epigraph problem is solved by SLSQP.
    """
    k, d = len(b), x1.shape[1]
    m0 = y0.shape[0]
    V0 = V0.reshape(-1, k, m0)
    c2 = 1.0 / (2.0 * t * (t - 1.0))
    # F_v(p) = sum_i c2 b_i |p_i|^2 - 2 p_i . g_vi + const_v
    g1 = (plan1 @ x1) / (2.0 * (t - 1.0))
    G = g1[None] - np.einsum("vik,kd->vid", V0, y0) / (2.0 * t)
    const = np.einsum("ij,j->", plan1, (x1 * x1).sum(1)) / (2.0 * (t - 1.0)) - np.einsum(
        "vik,k->v", V0, (y0 * y0).sum(1)
    ) / (2.0 * t)

    def pieces(p):
        p = p.reshape(k, d)
        quad = c2 * float(np.sum(b * (p * p).sum(1)))
        return quad - 2.0 * np.einsum("vid,id->v", G, p) + const

    def cons(z):
        return z[-1] - pieces(z[:-1])

    def cons_jac(z):
        p = z[:-1].reshape(k, d)
        grad_p = 2.0 * c2 * (b[:, None] * p)[None] - 2.0 * G  # (v, k, d)
        J = np.empty((G.shape[0], k * d + 1))
        J[:, :-1] = -grad_p.reshape(G.shape[0], -1)
        J[:, -1] = 1.0
        return J

    z0 = np.append(p0, float(np.max(pieces(p0))))
    r = minimize(
        lambda z: z[-1],
        z0,
        jac=lambda z: np.eye(1, k * d + 1, k * d)[0],
        method="SLSQP",
        constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}],
        options={"ftol": 1e-15, "maxiter": 500},
    )
    p = r.x[:-1]
    return float(np.max(pieces(p))), p


def brute_force_extrapolation(
    nu0: DiscreteMeasure,
    nu1: DiscreteMeasure,
    t: float,
    starts: int = 32,
    seed: int = 0,
) -> DiscreteMeasure:
    """Minimize the extrapolation functional directly over atom locations.

    The minimizer is a pushforward of ``nu1``, so candidates carry ``nu1``'s
    weights and only their locations ``p`` vary (merged atoms are points
    with ``p_i = p_j``). The functional is

        min_u A_u(p) / (2(t-1)) - min_v B_v(p) / (2t)

    over vertex plans ``u`` (towards ``nu1``) and ``v`` (towards ``nu0``),
    which is nonsmooth. Two stages:

    1. multi-start BFGS with finite-difference gradients from ``starts``
       deterministic starting points;
    2. exact refinement: for each vertex ``u`` the inner problem is a
       strongly convex min-max of quadratics, solved from the best stage-1
       point. The smallest value over both stages wins.
    """
    same_dim(nu0, nu1)
    if nu1.n > MAX_EXTRAPOLATION_ATOMS or nu1.dim > 2:
        raise TooLarge("oracle handles at most 3 atoms in dimension at most 2")
    if not t > 1:
        raise ValueError("t must exceed 1")
    d = nu1.dim
    b = nu1.weights
    k = nu1.n
    x1 = nu1.atoms
    y0 = nu0.atoms
    rng = np.random.default_rng(seed)
    V1 = _vertices(tuple(b), tuple(b))
    V0 = _vertices(tuple(b), tuple(nu0.weights))
    spread = float(np.max(np.abs(np.concatenate([y0.ravel(), x1.ravel()]))))
    radius = (t + 1.0) * (spread + 1e-3)

    def f(p):
        p = p.reshape(k, d)
        c1 = ((p[:, None, :] - x1[None]) ** 2).sum(-1).ravel()
        c0 = ((p[:, None, :] - y0[None]) ** 2).sum(-1).ravel()
        return np.min(V1 @ c1) / (2.0 * (t - 1.0)) - np.min(V0 @ c0) / (2.0 * t)

    best_val, best_p = math.inf, None
    for s in range(starts):
        if s == 0:
            # linear extrapolation of the means as a first guess
            p0 = (t * x1 - (t - 1.0) * (nu0.weights @ y0)).ravel()
        else:
            p0 = rng.uniform(-radius, radius, size=k * d)
        r = minimize(f, p0, method="BFGS", jac="3-point", options={"gtol": 1e-9, "maxiter": 100})
        if r.fun < best_val:
            best_val, best_p = float(r.fun), r.x
    for u in V1:
        plan1 = u.reshape(k, k)
        val, p = _minmax_refine(best_p, plan1, V0, b, x1, y0, t)
        # re-evaluate with the true functional; the frozen plan only bounds it
        val = float(f(p))
        if val < best_val:
            best_val, best_p = val, p
    return validate_normalize(best_p.reshape(k, d), b)


def extrapolation_functional_vertices(rho, nu0, nu1, t) -> float:
    """Extrapolation functional with W2 by vertex enumeration."""
    return w2_squared_vertices(rho, nu1) / (2.0 * (t - 1.0)) - w2_squared_vertices(
        rho, nu0
    ) / (2.0 * t)


__all__ = [
    "brute_force_backward",
    "brute_force_extrapolation",
    "extrapolation_functional_vertices",
    "grid_optimum",
    "w2_squared_vertices",
]
