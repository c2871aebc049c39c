"""Exact discrete optimal transport with squared Euclidean cost.

The transportation LP is solved by a primal network simplex on the
bipartite supply/demand graph (the classical u-v method). Plans returned
are vertices of the transportation polytope, and every solve also yields
dual potentials that certify optimality.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import SizeLimitExceeded, ZeroRowMass
from .measures import DiscreteMeasure, same_dim, validate_normalize

MAX_CELLS = 40_000


def sqdist(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Matrix of squared distances ``|x_i - y_j|^2``.

    Coordinates are accumulated with Kahan summation.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = x.shape[1]
    if d == 1:
        diff = x[:, 0][:, None] - y[:, 0][None, :]
        return diff * diff
    total = np.zeros((x.shape[0], y.shape[0]))
    comp = np.zeros_like(total)
    for k in range(d):
        diff = x[:, k][:, None] - y[:, k][None, :]
        term = diff * diff - comp
        new = total + term
        comp = (new - total) - term
        total = new
    return total


class TransportSimplex:
    """Network simplex for ``min <C, P>`` over plans with marginals ``a``, ``b``.

    The basis (a spanning tree of ``n + m - 1`` cells) is kept between calls
    to :meth:`solve`, so a sequence of costs on the same marginals is
    warm-started. Entering cell: most negative reduced cost, lowest flat
    index on ties. Leaving cell: lowest flat index among the blocking ones.
    After a long run of degenerate pivots the entering rule switches to
    Bland's (first negative reduced cost) to rule out cycling.
    """

    def __init__(self, a, b):
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.n = self.a.size
        self.m = self.b.size
        if self.n * self.m > MAX_CELLS:
            raise SizeLimitExceeded(
                f"{self.n}x{self.m} transport problem exceeds {MAX_CELLS} cells"
            )
        self.basis: Optional[list] = None
        self.flow: Optional[np.ndarray] = None
        self.pivots = 0

    # -- basis construction -------------------------------------------------

    def _initial_basis(self, C):
        n, m = self.n, self.m
        r = self.a.copy()
        c = self.b.copy()
        flow = np.zeros((n, m))
        row_on = np.ones(n, dtype=bool)
        col_on = np.ones(m, dtype=bool)
        nr, nc = n, m
        basis = []
        big = np.inf
        while True:
            masked = np.where(row_on[:, None] & col_on[None, :], C, big)
            k = int(np.argmin(masked))
            i, j = divmod(k, m)
            x = min(r[i], c[j])
            flow[i, j] = x
            basis.append((i, j))
            r[i] -= x
            c[j] -= x
            if nr == 1 and nc == 1:
                break
            if nr == 1:
                col_on[j] = False
                nc -= 1
            elif nc == 1:
                row_on[i] = False
                nr -= 1
            elif r[i] <= c[j]:
                row_on[i] = False
                nr -= 1
            else:
                col_on[j] = False
                nc -= 1
        self.basis = basis
        self.flow = flow

    def _adjacency(self):
        n = self.n
        adj = [[] for _ in range(n + self.m)]
        for i, j in self.basis:
            adj[i].append(n + j)
            adj[n + j].append(i)
        return adj

    def _potentials(self, C, adj):
        n, m = self.n, self.m
        u = np.zeros(n)
        v = np.zeros(m)
        seen = [False] * (n + m)
        seen[0] = True
        queue = deque([0])
        while queue:
            node = queue.popleft()
            for nb in adj[node]:
                if seen[nb]:
                    continue
                seen[nb] = True
                if node < n:
                    v[nb - n] = C[node, nb - n] - u[node]
                else:
                    u[nb] = C[nb, node - n] - v[node - n]
                queue.append(nb)
        return u, v

    @staticmethod
    def _path(adj, start, goal):
        parent = {start: None}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            if node == goal:
                break
            for nb in adj[node]:
                if nb not in parent:
                    parent[nb] = node
                    queue.append(nb)
        path = [goal]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]])
        path.reverse()
        return path

    def _recompute_flow(self):
        """Basic solution of the current tree, by leaf elimination."""
        n, m = self.n, self.m
        adj = [set() for _ in range(n + m)]
        for i, j in self.basis:
            adj[i].add(n + j)
            adj[n + j].add(i)
        rem = np.concatenate([self.a, self.b])
        flow = np.zeros((n, m))
        leaves = deque(k for k in range(n + m) if len(adj[k]) == 1)
        done = 0
        while leaves and done < n + m - 1:
            leaf = leaves.popleft()
            if len(adj[leaf]) != 1:
                continue
            other = next(iter(adj[leaf]))
            x = rem[leaf]
            if leaf < n:
                i, j = leaf, other - n
            else:
                i, j = other, leaf - n
            flow[i, j] = x
            rem[other] -= x
            rem[leaf] = 0.0
            adj[leaf].discard(other)
            adj[other].discard(leaf)
            done += 1
            if len(adj[other]) == 1:
                leaves.append(other)
        np.maximum(flow, 0.0, out=flow)
        self.flow = flow

    # -- main loop ------------------------------------------------------------

    def solve(self, C, warm: bool = True, max_pivots: Optional[int] = None):
        """Return ``(plan, u, v)`` minimizing ``<C, plan>``.

        ``u`` and ``v`` are dual potentials with ``u_i + v_j <= C_ij``
        everywhere and equality on the basic cells.
        """
        C = np.asarray(C, dtype=float)
        n, m = self.n, self.m
        if not warm or self.basis is None:
            self._initial_basis(C)
        flow = self.flow
        basis_set = set(self.basis)
        adj = self._adjacency()
        eps = 1e-12 * (1.0 + float(np.max(np.abs(C))))
        if max_pivots is None:
            max_pivots = 50 * (n + m) * max(n, m) + 1000
        degenerate_run = 0
        pivots = 0
        while True:
            u, v = self._potentials(C, adj)
            red = C - u[:, None] - v[None, :]
            if degenerate_run > 2 * (n + m):
                neg = np.flatnonzero(red.ravel() < -eps)
                if neg.size == 0:
                    break
                k = int(neg[0])
            else:
                k = int(np.argmin(red))
                if red.flat[k] >= -eps:
                    break
            ei, ej = divmod(k, m)
            path = self._path(adj, ei, n + ej)
            cells = []
            for p, q in zip(path[:-1], path[1:]):
                cells.append((p, q - n) if p < n else (q, p - n))
            minus = cells[0::2]
            plus = cells[1::2]
            theta = min(flow[c] for c in minus)
            leave = min((c for c in minus if flow[c] == theta), key=lambda c: c[0] * m + c[1])
            for c in minus:
                flow[c] -= theta
            for c in plus:
                flow[c] += theta
            flow[ei, ej] += theta
            flow[leave] = 0.0
            basis_set.discard(leave)
            basis_set.add((ei, ej))
            li, lj = leave
            adj[li].remove(n + lj)
            adj[n + lj].remove(li)
            adj[ei].append(n + ej)
            adj[n + ej].append(ei)
            degenerate_run = degenerate_run + 1 if theta == 0.0 else 0
            pivots += 1
            if pivots > max_pivots:
                raise RuntimeError("network simplex failed to terminate")
        self.basis = sorted(basis_set)
        self.pivots = pivots
        self._recompute_flow()
        u, v = self._potentials(C, self._adjacency())
        return self.flow.copy(), u, v


@dataclass(frozen=True, eq=False)
class Coupling:
    """Transport plan between two discrete measures."""

    source: DiscreteMeasure
    target: DiscreteMeasure
    plan: np.ndarray
    cost: float
    potentials: Optional[tuple] = field(default=None, repr=False)

    def check(self, tol: float = 1e-10) -> bool:
        p = self.plan
        return bool(
            np.all(p >= 0)
            and np.max(np.abs(p.sum(axis=1) - self.source.weights)) <= tol
            and np.max(np.abs(p.sum(axis=0) - self.target.weights)) <= tol
            and abs(plan_cost(p, self.source.atoms, self.target.atoms) - self.cost)
            <= tol * max(1.0, self.cost)
        )

    def to_dict(self) -> dict:
        from .measures import to_dict

        return {
            "schema": "coupling/1",
            "source": to_dict(self.source),
            "target": to_dict(self.target),
            "plan": [[float(x) for x in row] for row in self.plan],
            "cost": float(self.cost),
        }


def plan_cost(plan, x, y) -> float:
    return math.fsum((plan * sqdist(x, y)).ravel())


def transport_plan(a, b, C, solver: Optional[TransportSimplex] = None):
    """Optimal plan for a general cost matrix; returns ``(plan, u, v)``."""
    if solver is None:
        solver = TransportSimplex(a, b)
    return solver.solve(C)


def w2_lp(mu: DiscreteMeasure, nu: DiscreteMeasure):
    """Exact ``W_2(mu, nu)`` and an optimal coupling, via the transportation LP."""
    same_dim(mu, nu)
    C = sqdist(mu.atoms, nu.atoms)
    plan, u, v = TransportSimplex(mu.weights, nu.weights).solve(C)
    # Tree flows are differences of weights; stray cells at rounding level
    # would otherwise add a sqrt(eps)-sized floor to the distance.
    noise = 8.0 * np.finfo(float).eps * (mu.n + nu.n) * max(mu.weights.max(), nu.weights.max())
    plan[np.abs(plan) <= noise] = 0.0
    cost = max(math.fsum((plan * C).ravel()), 0.0)
    return math.sqrt(cost), Coupling(mu, nu, plan, cost, (u, v))


def w2(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """``W_2`` distance; exact quantile formula in 1D, LP otherwise."""
    if same_dim(mu, nu) == 1:
        from .quantile1d import w2_1d

        return w2_1d(mu, nu)
    return w2_lp(mu, nu)[0]


def certify_optimal(coupling: Coupling, tol: float = 1e-9) -> bool:
    """Complementary slackness check with the stored dual potentials."""
    if coupling.potentials is None:
        return False
    u, v = coupling.potentials
    C = sqdist(coupling.source.atoms, coupling.target.atoms)
    slack = C - u[:, None] - v[None, :]
    scale = 1.0 + float(np.max(np.abs(C)))
    support = coupling.plan > 0
    return bool(
        np.all(slack >= -tol * scale) and np.all(np.abs(slack[support]) <= tol * scale)
    )


@dataclass(frozen=True, eq=False)
class BarycentricMap:
    """Conditional means ``z_i = sum_j plan_ij y_j / a_i`` of a coupling."""

    source: DiscreteMeasure
    images: np.ndarray

    def pushforward(self) -> DiscreteMeasure:
        return validate_normalize(self.images, self.source.weights)


def barycentric_images(plan, source_weights, target_atoms) -> np.ndarray:
    rows = np.asarray(plan).sum(axis=1)
    if np.any(rows <= 0):
        raise ZeroRowMass("coupling has a row with no mass")
    return (plan @ target_atoms) / np.asarray(source_weights)[:, None]


def barycentric_map(c: Coupling) -> BarycentricMap:
    images = barycentric_images(c.plan, c.source.weights, c.target.atoms)
    return BarycentricMap(c.source, images)


def plan_pushforward(plan, x, y, fn, threshold: float = 0.0) -> DiscreteMeasure:
    """Push a plan forward under ``(x, y) -> fn(x, y)``, one atom per support cell."""
    ii, jj = np.nonzero(plan > threshold)
    pts = fn(x[ii], y[jj])
    return validate_normalize(pts, plan[ii, jj])


def geodesic_point(mu: DiscreteMeasure, nu: DiscreteMeasure, s: float, coupling=None):
    """Point at time ``s`` on the displacement geodesic from ``mu`` to ``nu``."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    if coupling is None:
        coupling = w2_lp(mu, nu)[1]
    return plan_pushforward(
        coupling.plan, mu.atoms, nu.atoms, lambda x, y: (1.0 - s) * x + s * y
    )


__all__ = [
    "sqdist",
    "TransportSimplex",
    "Coupling",
    "plan_cost",
    "transport_plan",
    "w2_lp",
    "w2",
    "certify_optimal",
    "BarycentricMap",
    "barycentric_images",
    "barycentric_map",
    "plan_pushforward",
    "geodesic_point",
]
