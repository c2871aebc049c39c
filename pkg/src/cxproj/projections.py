"""W2 projections onto convex-order cones.

``backward_project(mu, nu)`` returns the measure closest to ``mu`` among those
dominated by ``nu``. It is computed as a weak transport problem: minimize

    V(P) = sum_i a_i |x_i - z_i(P)|^2,   z_i(P) = sum_j P_ij y_j / a_i,

over couplings ``P`` of ``mu`` and ``nu``; the projection is the image of
``mu`` under the barycentric map ``x_i -> z_i``. ``V`` is a convex quadratic
on the transportation polytope, minimized by Frank-Wolfe with away steps
whose linear oracle is the transport LP of :mod:`cxproj.ot_core`. Once the
iterate settles on a face, an exact least-squares solve on that face
(primal active set) removes the slow tail of Frank-Wolfe.

``forward_project(mu, nu)`` returns a measure closest to ``nu`` among those
dominating ``mu``, obtained from a metric extrapolation followed by a
displacement interpolation. One-dimensional fast paths work on quantile
functions directly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import null_space

from .errors import ConfigError, MaxItersExceeded, TimeNotGreaterThanOne
from .measures import DiscreteMeasure, dilate, same_dim, validate_normalize
from .ot_core import (
    BarycentricMap,
    Coupling,
    TransportSimplex,
    plan_cost,
    plan_pushforward,
    w2_lp,
)
from .quantile1d import (
    _check_1d,
    common_refinement,
    measure_from_quantile,
    pav_isotonic,
    quantile_of,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    """Tuning knobs shared by the projection and extrapolation solvers.

    Attributes
    ----------
    fw_gap_tol : float
        Stop when the Frank-Wolfe gap falls below this fraction of the
        objective at the initial (product) coupling.
    max_iters : int
        Frank-Wolfe iteration cap.
    t_pipeline : float
        Extrapolation time used by :func:`forward_project`; must exceed 1.
    tol_order : float
        Tolerance handed to convex-order checks of solver output.
    polish_every : int
        Attempt an exact face solve every this many iterations.
    forward_map : {"plan", "lp", "barycentric"}
        Coupling between ``nu`` and the extrapolation used by
        :func:`forward_project`. ``"plan"`` reuses the optimal coupling
        produced by the backward reduction, ``"lp"`` re-solves the transport
        LP and pushes its vertex plan forward, ``"barycentric"`` averages
        the LP plan into a map.
    strict : bool
        Raise :class:`MaxItersExceeded` instead of returning a flagged
        non-converged solution.
    refine : bool
        After the gap tolerance is met, keep alternating face solves and
        Frank-Wolfe steps until the gap is at rounding level.
    """

    fw_gap_tol: float = 1e-9
    max_iters: int = 50_000
    t_pipeline: float = 2.0
    tol_order: float = 1e-8
    polish_every: int = 20
    forward_map: str = "plan"
    strict: bool = False
    refine: bool = True

    def __post_init__(self):
        if not self.fw_gap_tol > 0:
            raise ConfigError("fw_gap_tol must be positive")
        if not self.t_pipeline > 1:
            raise ConfigError("t_pipeline must exceed 1")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be at least 1")
        if self.forward_map not in ("plan", "lp", "barycentric"):
            raise ConfigError(f"unknown forward_map {self.forward_map!r}")


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True, eq=False)
class BackwardSolution:
    projected: DiscreteMeasure
    plan: Coupling
    map: BarycentricMap
    objective: float
    fw_gap: float
    converged: bool = True
    iterations: int = 0
    polishes: int = field(default=0, repr=False)


# --------------------------------------------------------------------------
# weak transport objective
# --------------------------------------------------------------------------


class _WeakCost:
    """``V(P) = sum_i |a_i x_i - (P y)_i|^2 / a_i`` and its derivatives."""

    def __init__(self, a, x, y):
        self.a = a
        self.ax = a[:, None] * x
        self.y = y
        self.inv_a = 1.0 / a

    def residual(self, P):
        return self.ax - P @ self.y

    def value(self, P) -> float:
        R = self.residual(P)
        return math.fsum(self.inv_a * np.einsum("ij,ij->i", R, R))

    def grad(self, P):
        R = self.residual(P)
        return -2.0 * (self.inv_a[:, None] * R) @ self.y.T

    def curvature(self, D) -> float:
        DY = D @ self.y
        return float(np.sum(self.inv_a * np.einsum("ij,ij->i", DY, DY)))


def _face_polish(cost: _WeakCost, P, max_rounds=None, extra=None):
    """Exact minimization of ``V`` over the face ``{P >= 0, supp P within supp P0}``.

    Primal active set: solve the equality-constrained least squares problem
    on the current support, walk towards its solution until an entry hits
    zero, drop that entry, repeat. Every round lowers ``V``. ``extra`` is an
    optional boolean mask of cells admitted to the support at value zero.
    """
    n, m = P.shape
    d = cost.y.shape[1]
    sqrt_inv_a = np.sqrt(cost.inv_a)
    P = P.copy()
    mask = P.ravel() > 0
    if extra is not None:
        mask = mask | np.asarray(extra).ravel()
    support = np.flatnonzero(mask)
    if max_rounds is None:
        max_rounds = support.size + 1
    rows_all, cols_all = np.divmod(np.arange(n * m), m)
    c = (sqrt_inv_a[:, None] * cost.ax).reshape(-1)
    for _ in range(max_rounds):
        rows = rows_all[support]
        cols = cols_all[support]
        k = support.size
        E = np.zeros((n + m, k))
        E[rows, np.arange(k)] = 1.0
        E[n + cols, np.arange(k)] = 1.0
        N = null_space(E)
        p0 = P.ravel()[support]
        if N.shape[1] == 0:
            break
        # M maps the support entries to the stacked, scaled barycentric sums
        M = np.zeros((n * d, k))
        for kk in range(d):
            M[rows * d + kk, np.arange(k)] = cost.y[cols, kk] * sqrt_inv_a[rows]
        MN = M @ N
        w, *_ = np.linalg.lstsq(MN, c - M @ p0, rcond=None)
        step = N @ w
        target = p0 + step
        neg = step < 0
        if not np.any(target[neg] < 0):
            P.ravel()[support] = np.maximum(target, 0.0)
            break
        blocking = neg & (target < 0)
        ratios = p0[blocking] / (p0[blocking] - target[blocking])
        alpha = float(np.min(ratios))
        new = p0 + alpha * step
        hit = np.flatnonzero(blocking)[np.argmin(ratios)]
        new[hit] = 0.0
        new[new < 0] = 0.0
        P.ravel()[support] = new
        support = support[(new > 0) | ((step > 0) & (np.arange(k) != hit))]
        if support.size == 0:
            break
    return P


# Below this many cells the solver starts from an exact face solve over the
# full product support, which usually lands on the optimum directly.
_FULL_POLISH_CELLS = 400


def _solve_weak(a, x, b, y, cfg: SolverConfig):
    """Frank-Wolfe with away steps for the weak transport QP.

    Returns ``(plan, value, gap, converged, iterations, polishes)``.
    """
    cost = _WeakCost(a, x, y)
    lmo = TransportSimplex(a, b)
    P = np.outer(a, b)
    polishes = 0
    if P.size <= _FULL_POLISH_CELLS:
        P = _face_polish(cost, P)
        polishes += 1
    # active set: key -> [atom, weight]. The starting plan is a feasible
    # non-vertex atom; away steps remove it like any other atom.
    active = {b"__start__": [P.copy(), 1.0]}
    v0 = cost.value(np.outer(a, b))
    scale = float(
        np.sum(a * np.einsum("ij,ij->i", x, x)) + np.sum(b * np.einsum("ij,ij->i", y, y))
    )
    floor = 1e-15 * scale
    tol = cfg.fw_gap_tol * v0 + floor
    target = floor if cfg.refine else tol
    best_P, best_val = P.copy(), cost.value(P)
    gap = np.inf
    failed_polishes = 0
    it = 0
    for it in range(1, cfg.max_iters + 1):
        G = cost.grad(P)
        S, _, _ = lmo.solve(G)
        gap = float(np.sum(G * (P - S)))
        if gap <= target or (gap <= tol and failed_polishes >= 5):
            break
        if it % cfg.polish_every == 0 or gap <= tol:
            # face solve on the current support enlarged by the oracle vertex
            Q = _face_polish(cost, P, extra=S > 0)
            polishes += 1
            if cost.value(Q) < cost.value(P) - 1e-3 * floor:
                P = Q
                active = {b"__polish__": [P.copy(), 1.0]}
                failed_polishes = 0
                continue
            failed_polishes += 1

        # drop atoms whose weight has decayed to nothing
        for k in [k for k, (_, w) in active.items() if w <= 1e-15]:
            if len(active) > 1:
                del active[k]
        keys = list(active)
        dots = [float(np.sum(G * active[k][0])) for k in keys]
        ia = int(np.argmax(dots))
        away_key = keys[ia]
        away_gap = dots[ia] - float(np.sum(G * P))
        if gap >= away_gap or len(active) == 1:
            D = S - P
            gmax = 1.0
            slope = -gap
            fw_step = True
        else:
            wa = active[away_key][1]
            D = P - active[away_key][0]
            gmax = wa / (1.0 - wa)
            slope = -away_gap
            fw_step = False
        curv = cost.curvature(D)
        gamma = gmax if curv <= 0 else min(gmax, -slope / (2.0 * curv))
        if not gamma > 0:
            if not fw_step:
                del active[away_key]
                continue
            break
        P = P + gamma * D
        np.maximum(P, 0.0, out=P)
        if fw_step:
            key = S.tobytes()
            if gamma >= 1.0:
                active = {key: [S, 1.0]}
            else:
                for k in active:
                    active[k][1] *= 1.0 - gamma
                if key in active:
                    active[key][1] += gamma
                else:
                    active[key] = [S, gamma]
        else:
            for k in active:
                active[k][1] *= 1.0 + gamma
            active[away_key][1] -= gamma
            if gamma >= gmax or active[away_key][1] <= 1e-15:
                del active[away_key]
        val = cost.value(P)
        if val < best_val:
            best_P, best_val = P.copy(), val

    val = cost.value(P)
    if val > best_val:
        P, val = best_P, best_val
    G = cost.grad(P)
    S, _, _ = lmo.solve(G)
    Q = _face_polish(cost, P, extra=S > 0)
    polishes += 1
    if cost.value(Q) < val:
        P = Q
    G = cost.grad(P)
    S, _, _ = lmo.solve(G)
    gap = max(float(np.sum(G * (P - S))), 0.0)
    return P, cost.value(P), gap, gap <= tol, it, polishes


def backward_project(
    mu: DiscreteMeasure, nu: DiscreteMeasure, cfg: SolverConfig = DEFAULT_CONFIG
) -> BackwardSolution:
    """W2 projection of ``mu`` onto ``{rho : rho dominated by nu in convex order}``.

    Returns a :class:`BackwardSolution` whose ``projected`` measure puts the
    weight of each atom ``x_i`` of ``mu`` at its barycentric image ``z_i``.
    ``fw_gap`` bounds the suboptimality of ``objective``.
    """
    same_dim(mu, nu)
    a, x = mu.weights, mu.atoms
    b, y = nu.weights, nu.atoms
    P, val, gap, converged, iters, polishes = _solve_weak(a, x, b, y, cfg)
    if not converged:
        msg = f"Frank-Wolfe stopped after {iters} iterations with gap {gap:.3e}"
        if cfg.strict:
            raise MaxItersExceeded(msg)
        logger.warning(msg)
    # exact marginals for the reported plan: rows are rescaled, the column
    # error is at rounding level after the face solve
    rows = P.sum(axis=1)
    P = P * (a / rows)[:, None]
    z = (P @ y) / a[:, None]
    projected = DiscreteMeasure(z.copy(), a.copy())
    plan = Coupling(mu, nu, P, plan_cost(P, x, y))
    return BackwardSolution(
        projected=projected,
        plan=plan,
        map=BarycentricMap(mu, z),
        objective=val,
        fw_gap=gap,
        converged=converged,
        iterations=iters,
        polishes=polishes,
    )


def _grid(mu, nu):
    return common_refinement(quantile_of(mu), quantile_of(nu))


def backward_project_1d(mu: DiscreteMeasure, nu: DiscreteMeasure, t: Optional[float] = None):
    """Exact backward projection in dimension one.

    On the common quantile grid the projection has quantile function
    ``X_mu - P(X_mu - X_nu)``, ``P`` the isotonic projection. With ``t``
    given, the same quantity is computed through the extrapolation chain
    ``(t*theta*X_mu - Y)/(t - 1)``, ``Y = P((t-1) X_mu + (1-t) X_nu)``.
    """
    _check_1d(mu)
    _check_1d(nu)
    f, g = _grid(mu, nu)
    w = f.widths
    if t is None:
        out = f.values - pav_isotonic(f.values - g.values, w)
    else:
        if not t > 1:
            raise TimeNotGreaterThanOne(f"t must exceed 1, got {t}")
        theta = (t - 1.0) / t
        y_t = pav_isotonic((t - 1.0) * f.values + (1.0 - t) * g.values, w)
        out = (t * theta * f.values - y_t) / (t - 1.0)
    return measure_from_quantile(_as_step(f, out))


def forward_project_1d(mu: DiscreteMeasure, nu: DiscreteMeasure):
    """Exact forward projection in dimension one: ``X_nu + P(X_mu - X_nu)``."""
    _check_1d(mu)
    _check_1d(nu)
    f, g = _grid(mu, nu)
    out = g.values + pav_isotonic(f.values - g.values, f.widths)
    return measure_from_quantile(_as_step(f, out))


def _as_step(template, values):
    from .quantile1d import QuantileFunction

    return QuantileFunction(template.breakpoints, np.asarray(values, float), False)


def forward_project(
    mu: DiscreteMeasure, nu: DiscreteMeasure, cfg: SolverConfig = DEFAULT_CONFIG, t=None
) -> DiscreteMeasure:
    """W2 projection of ``nu`` onto ``{rho : mu dominated by rho}``.

    With ``theta = (t-1)/t``: extrapolate from ``nu`` through ``D^theta mu``
    to time ``t``, couple ``nu`` optimally with the extrapolation ``E`` and
    push the coupling forward under ``(y, e) -> (e + (t-1) y) / (t-1)``,
    which is the time ``1/t`` point of the ``nu -> E`` geodesic dilated by
    ``1/theta``.

    In dimension one the coupling is the monotone one and the result is
    exact. In higher dimension the optimal ``nu -> E`` coupling is usually
    not unique: the backward plan of the reduction is optimal for it and
    typically splits mass. The default ``forward_map="plan"`` uses exactly
    that plan, so each atom ``x_i`` of ``mu`` is the mean of the mass it
    sends out and ``mu`` is dominated by the output by construction.
    """
    from .extrapolation import extrapolate_pav, extrapolate_reduction

    same_dim(mu, nu)
    t = cfg.t_pipeline if t is None else float(t)
    if not t > 1:
        raise TimeNotGreaterThanOne(f"t must exceed 1, got {t}")
    theta = (t - 1.0) / t
    nu1 = dilate(mu, theta)
    push = lambda y, e: (e + (t - 1.0) * y) / (t - 1.0)
    if mu.dim == 1 or cfg.forward_map != "plan":
        if mu.dim == 1:
            E = extrapolate_pav(nu, nu1, t)
        else:
            E = extrapolate_reduction(nu, nu1, t, cfg).extrapolated
        _, coupling = w2_lp(nu, E)
        if cfg.forward_map == "barycentric":
            S = (coupling.plan @ E.atoms) / nu.weights[:, None]
            return validate_normalize(push(nu.atoms, S), nu.weights)
        return plan_pushforward(coupling.plan, nu.atoms, E.atoms, push)
    red = extrapolate_reduction(nu, nu1, t, cfg)
    # backward plan: rows follow the atoms of mu (and of E), columns those of nu
    plan = red.backward.plan.plan.T
    E = red.extrapolated
    cost = plan_cost(plan, nu.atoms, E.atoms)
    best, _ = w2_lp(nu, E)
    if cost - best * best > 1e-9 * (1.0 + cost):
        logger.warning(
            "reduction coupling is not transport-optimal (cost %.3e vs %.3e)", cost, best * best
        )
    return plan_pushforward(plan, nu.atoms, E.atoms, push)


__all__ = [
    "SolverConfig",
    "DEFAULT_CONFIG",
    "BackwardSolution",
    "backward_project",
    "backward_project_1d",
    "forward_project",
    "forward_project_1d",
]
