"""Deciding and certifying the convex order between discrete measures.

``mu`` is dominated by ``nu`` when ``int phi dmu <= int phi dnu`` for every
convex ``phi``. Two decision procedures are provided:

* dimension one: equal means and ``int_a^1 X_mu <= int_a^1 X_nu`` at every
  breakpoint ``a`` of the common quantile grid (the tail integrals are
  piecewise linear in ``a``, so breakpoints suffice);
* any dimension: feasibility of the martingale transport LP
  ``{P in Pi(mu, nu) : sum_j P_ij y_j = a_i x_i}``. Infeasibility comes with
  dual variables that assemble into a convex piecewise-linear witness.

Inequalities are relaxed by ``tol * (1 + M2(nu))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix

from .measures import DiscreteMeasure, moments, same_dim, validate_normalize
from .ot_core import Coupling, plan_cost
from .quantile1d import common_refinement, quantile_of

DEFAULT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ConvexWitness:
    """Convex function ``phi(x) = max_k (intercepts[k] + slopes[k] . x)``.

    ``gap`` is ``int phi dmu - int phi dnu``; a positive gap refutes
    domination of ``mu`` by ``nu``.
    """

    intercepts: np.ndarray
    slopes: np.ndarray
    gap: float
    kind: str = "max-affine"

    def __call__(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.max(pts @ self.slopes.T + self.intercepts, axis=1)

    def integrate(self, m: DiscreteMeasure) -> float:
        return math.fsum(m.weights * self(m.atoms))


def _witness(intercepts, slopes, mu, nu, kind="max-affine") -> ConvexWitness:
    w = ConvexWitness(np.asarray(intercepts, float), np.atleast_2d(slopes).astype(float), 0.0, kind)
    gap = w.integrate(mu) - w.integrate(nu)
    return ConvexWitness(w.intercepts, w.slopes, gap, kind)


@dataclass(frozen=True, eq=False)
class OrderResult:
    """Verdict of :func:`check_convex_order`.

    Attributes
    ----------
    dominated : bool
        Whether ``mu`` is dominated by ``nu`` within ``tol``.
    marginal : bool
        The largest violation is positive but within ``tol``; the verdict
        sits on the boundary of the order cone.
    violation : float
        Largest constraint violation (negative when all constraints hold
        with slack).
    tol : float
        Effective tolerance ``tol * (1 + M2(nu))``.
    method : {"quantile", "lp"}
    certificate : Coupling or None
        Martingale coupling from ``mu`` to ``nu``.
    witness : ConvexWitness or None
        Convex function integrating higher under ``mu`` than under ``nu``.
    """

    dominated: bool
    marginal: bool
    violation: float
    tol: float
    method: str
    certificate: Optional[Coupling] = None
    witness: Optional[ConvexWitness] = None

    @property
    def verdict(self) -> str:
        return "Dominated" if self.dominated else "NotDominated"

    def __bool__(self):
        return self.dominated


# --------------------------------------------------------------------------
# one-dimensional criterion
# --------------------------------------------------------------------------


def _hinge_witness(mu, nu) -> ConvexWitness:
    """Best call-type witness ``(x - k)^+`` or ``(k - x)^+`` over atom knots."""
    knots = np.union1d(mu.atoms[:, 0], nu.atoms[:, 0])
    best = None
    for sign in (1.0, -1.0):
        xm = sign * mu.atoms[:, 0]
        xn = sign * nu.atoms[:, 0]
        k = sign * knots
        em = np.maximum(xm[None, :] - k[:, None], 0.0) @ mu.weights
        en = np.maximum(xn[None, :] - k[:, None], 0.0) @ nu.weights
        i = int(np.argmax(em - en))
        cand = _witness([0.0, -k[i]], [[0.0], [sign]], mu, nu, "hinge")
        if best is None or cand.gap > best.gap:
            best = cand
    return best


def _check_1d(mu, nu, tol_eff):
    f, g = common_refinement(quantile_of(mu), quantile_of(nu))
    tm = f.tail_integrals()
    tn = g.tail_integrals()
    mean_gap = abs(tm[0] - tn[0])
    tail_gap = float(np.max(tm - tn))
    violation = max(mean_gap, tail_gap)
    dominated = violation <= tol_eff
    witness = None
    if not dominated:
        if mean_gap > tol_eff:
            sign = 1.0 if tm[0] > tn[0] else -1.0
            witness = _witness([0.0], [[sign]], mu, nu, "linear")
        else:
            witness = _hinge_witness(mu, nu)
    return dominated, violation, witness


# --------------------------------------------------------------------------
# martingale transport LP
# --------------------------------------------------------------------------


def _martingale_lp(mu: DiscreteMeasure, nu: DiscreteMeasure):
    """Minimize the L1 residual of the martingale constraints over Pi(mu, nu).

    Returns ``(residual, plan, alpha, lam)`` where ``alpha`` (n,) and
    ``lam`` (n, d) are the duals of the row and martingale constraints.
    """
    a, x = mu.weights, mu.atoms
    b, y = nu.weights, nu.atoms
    n, m, d = mu.n, nu.n, mu.dim
    nv = n * m + 2 * n * d
    rows, cols, vals = [], [], []
    cell = np.arange(n * m).reshape(n, m)
    ii, jj = np.divmod(np.arange(n * m), m)
    # row marginals
    rows.append(ii)
    cols.append(cell.ravel())
    vals.append(np.ones(n * m))
    # column marginals
    rows.append(n + jj)
    cols.append(cell.ravel())
    vals.append(np.ones(n * m))
    # martingale constraints with slacks
    for k in range(d):
        r = n + m + ii * d + k
        rows.append(r)
        cols.append(cell.ravel())
        vals.append(y[jj, k])
    base = n * m
    slack_rows = n + m + np.arange(n * d)
    rows += [slack_rows, slack_rows]
    cols += [base + np.arange(n * d), base + n * d + np.arange(n * d)]
    vals += [-np.ones(n * d), np.ones(n * d)]
    A = coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n + m + n * d, nv),
    ).tocsr()
    rhs = np.concatenate([a, b, (a[:, None] * x).ravel()])
    c = np.zeros(nv)
    c[base:] = 1.0
    res = linprog(c, A_eq=A, b_eq=rhs, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"martingale LP failed: {res.message}")
    plan = np.maximum(res.x[:base].reshape(n, m), 0.0)
    duals = res.eqlin.marginals
    alpha = duals[:n]
    lam = duals[n + m :].reshape(n, d)
    return float(res.fun), plan, alpha, lam


def _lp_witness(mu, nu, alpha, lam) -> ConvexWitness:
    best = None
    for sign in (1.0, -1.0):
        cand = _witness(sign * alpha, sign * lam, mu, nu)
        if best is None or cand.gap > best.gap:
            best = cand
    return best


def martingale_residual(plan, mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Largest ``|sum_j P_ij y_j - a_i x_i|`` over source atoms."""
    r = plan @ nu.atoms - mu.weights[:, None] * mu.atoms
    return float(np.max(np.abs(r)))


def _certificate(mu, nu, plan) -> Coupling:
    return Coupling(mu, nu, plan, plan_cost(plan, mu.atoms, nu.atoms))


# --------------------------------------------------------------------------
# public API
# --------------------------------------------------------------------------


def check_convex_order(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    tol: float = DEFAULT_TOL,
    certificate: bool = False,
    method: str = "auto",
) -> OrderResult:
    """Decide whether ``mu`` is dominated by ``nu`` in convex order.

    Parameters
    ----------
    tol : float
        Relative tolerance; constraints are relaxed by ``tol * (1 + M2(nu))``.
    certificate : bool
        Attach a martingale coupling when the verdict is Dominated. On the
        1D path this solves the LP in addition to the quantile test.
    method : {"auto", "quantile", "lp"}
        ``"auto"`` picks the quantile criterion in dimension one.
    """
    same_dim(mu, nu)
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    tol_eff = tol * (1.0 + moments(nu)[1])
    if method == "auto":
        method = "quantile" if mu.dim == 1 else "lp"
    if method == "quantile":
        dominated, violation, witness = _check_1d(mu, nu, tol_eff)
        cert = None
        if dominated and certificate:
            cert = _certificate(mu, nu, _martingale_lp(mu, nu)[1])
        return OrderResult(
            bool(dominated),
            bool(0.0 < violation <= tol_eff),
            float(violation),
            tol_eff,
            method,
            cert,
            witness,
        )
    if method != "lp":
        raise ValueError(f"unknown method {method!r}")
    resid, plan, alpha, lam = _martingale_lp(mu, nu)
    # L1 norm of the martingale residual at the LP optimum
    violation = max(resid, 0.0)
    dominated = violation <= tol_eff
    cert = witness = None
    if dominated:
        cert = _certificate(mu, nu, plan) if certificate else None
    else:
        witness = _lp_witness(mu, nu, alpha, lam)
    return OrderResult(
        bool(dominated), bool(0.0 < violation <= tol_eff), float(violation), tol_eff, "lp", cert, witness
    )


@dataclass(frozen=True, eq=False)
class WitnessTestResult:
    passed: bool
    worst_margin: float
    count: int
    worst_function: Optional[ConvexWitness] = None


def random_convex_function(dim, rng, scale=1.0, max_pieces=4) -> tuple:
    """Random max-affine convex function with knots spread over ``[-scale, scale]``."""
    k = int(rng.integers(1, max_pieces + 1))
    slopes = rng.normal(size=(k, dim))
    knots = rng.uniform(-scale, scale, size=(k, dim))
    intercepts = -np.einsum("ij,ij->i", slopes, knots)
    return intercepts, slopes


def random_convex_witness_test(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    count: int = 200,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> WitnessTestResult:
    """Falsify domination by sampling convex test functions.

    The first ``2 * dim`` samples are the coordinate functions and their
    negatives (they detect unequal means); the rest are random max-affine
    functions with knots inside the joint support box. Passes when every
    sample satisfies ``int phi dmu <= int phi dnu + tol * (1 + M2(nu))``.
    """
    same_dim(mu, nu)
    if count < 1:
        raise ValueError("count must be at least 1")
    d = mu.dim
    rng = np.random.default_rng(seed)
    tol_eff = tol * (1.0 + moments(nu)[1])
    scale = float(max(np.max(np.abs(mu.atoms)), np.max(np.abs(nu.atoms)), 1e-12))
    worst = None
    worst_margin = math.inf
    for s in range(count):
        if s < 2 * d:
            slope = np.zeros((1, d))
            slope[0, s // 2] = 1.0 if s % 2 == 0 else -1.0
            intercepts, slopes = np.zeros(1), slope
        else:
            intercepts, slopes = random_convex_function(d, rng, scale)
        w = _witness(intercepts, slopes, mu, nu)
        margin = tol_eff - w.gap
        if margin < worst_margin:
            worst_margin, worst = margin, w
    return WitnessTestResult(worst_margin >= 0, worst_margin, count, worst)


def random_dominated(nu: DiscreteMeasure, n_atoms: int, rng) -> DiscreteMeasure:
    """Random measure dominated by ``nu``, built from a random martingale coupling.

    Each atom of ``nu`` spreads its mass over ``n_atoms`` sources with
    Dirichlet proportions; source atoms are the conditional means.
    """
    if n_atoms < 1:
        raise ValueError("n_atoms must be at least 1")
    split = rng.dirichlet(np.ones(n_atoms), size=nu.n).T  # (n_atoms, m)
    plan = split * nu.weights[None, :]
    a = plan.sum(axis=1)
    keep = a > 1e-12
    plan, a = plan[keep], a[keep]
    x = (plan @ nu.atoms) / a[:, None]
    return validate_normalize(x, a)


__all__ = [
    "ConvexWitness",
    "OrderResult",
    "WitnessTestResult",
    "check_convex_order",
    "martingale_residual",
    "random_convex_function",
    "random_convex_witness_test",
    "random_dominated",
]
