"""Quantile functions of one-dimensional discrete measures.

Every 1D measure is represented by its quantile function, a right-continuous
step function on ``(0, 1)``. Affine combinations of quantile functions are
evaluated exactly on a shared set of breakpoints, so the 1D distance and the
isotonic projection below involve no quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, NotMonotone, WrongDimension
from .measures import DiscreteMeasure, validate_normalize

# Breakpoints closer than this are treated as one; the resulting sliver
# pieces are rounding artifacts of cumulative weight sums.
BREAK_MERGE_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class QuantileFunction:
    """Step function taking ``values[i]`` on ``[breakpoints[i], breakpoints[i+1])``."""

    breakpoints: np.ndarray
    values: np.ndarray
    monotone: bool = True

    def __post_init__(self):
        b = self.breakpoints
        if b.ndim != 1 or len(b) != len(self.values) + 1:
            raise LengthMismatch("need exactly one more breakpoint than values")
        if b[0] != 0.0 or b[-1] != 1.0:
            raise ValueError("breakpoints must start at 0 and end at 1")
        if np.any(np.diff(b) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if self.monotone and np.any(np.diff(self.values) < 0):
            raise NotMonotone("values decrease but the function is flagged monotone")
        b.setflags(write=False)
        self.values.setflags(write=False)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    def __call__(self, a):
        a = np.asarray(a, dtype=float)
        idx = np.searchsorted(self.breakpoints, a, side="right") - 1
        idx = np.clip(idx, 0, len(self.values) - 1)
        return self.values[idx]

    def integral(self) -> float:
        return math.fsum(self.widths * self.values)

    def tail_integrals(self) -> np.ndarray:
        """``int_{b_k}^1 X(a) da`` at every breakpoint ``b_k``."""
        pieces = self.widths * self.values
        tails = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])
        return tails

    def combine(self, other: "QuantileFunction", alpha: float, beta: float):
        """``alpha * self + beta * other`` on the common refinement (not monotone)."""
        f, g = common_refinement(self, other)
        return QuantileFunction(f.breakpoints, alpha * f.values + beta * g.values, False)


def _check_1d(m: DiscreteMeasure):
    if m.dim != 1:
        raise WrongDimension(f"expected a one-dimensional measure, got dim={m.dim}")


def quantile_of(m: DiscreteMeasure) -> QuantileFunction:
    """Quantile function ``X(a) = inf{x : F(x) > a}`` of a 1D measure."""
    _check_1d(m)
    x = m.atoms[:, 0]
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ws = m.weights[order]
    # merge tied atoms
    starts = np.concatenate([[True], xs[1:] != xs[:-1]])
    group = np.cumsum(starts) - 1
    values = xs[starts]
    widths = np.zeros(len(values))
    np.add.at(widths, group, ws)
    breaks = np.concatenate([[0.0], np.cumsum(widths)])
    breaks[-1] = 1.0
    return _clean(breaks, values, True)


def _clean(breaks, values, monotone):
    """Drop sliver pieces produced by rounding in cumulative sums."""
    keep = np.diff(breaks) > BREAK_MERGE_TOL
    if not np.all(keep):
        idx = np.flatnonzero(keep)
        values = np.asarray(values)[idx]
        breaks = np.concatenate([[0.0], np.asarray(breaks)[idx[1:]], [1.0]])
    return QuantileFunction(np.asarray(breaks, float), np.asarray(values, float), monotone)


def common_refinement(f: QuantileFunction, g: QuantileFunction):
    """Re-express ``f`` and ``g`` on the union of their breakpoints."""
    if f.breakpoints.shape == g.breakpoints.shape and np.array_equal(
        f.breakpoints, g.breakpoints
    ):
        return f, g
    b = np.union1d(f.breakpoints, g.breakpoints)
    keep = np.concatenate([[True], np.diff(b) > BREAK_MERGE_TOL])
    b = b[keep]
    b[-1] = 1.0
    mid = 0.5 * (b[:-1] + b[1:])
    fv = f(mid)
    gv = g(mid)
    return (
        QuantileFunction(b, fv, f.monotone),
        QuantileFunction(b.copy(), gv, g.monotone),
    )


def w2_1d(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Exact 2-Wasserstein distance between two 1D measures."""
    _check_1d(mu)
    _check_1d(nu)
    f, g = common_refinement(quantile_of(mu), quantile_of(nu))
    return quantile_l2(f, g)


def quantile_l2(f: QuantileFunction, g: QuantileFunction) -> float:
    """``L^2(0,1)`` distance between two step functions."""
    f, g = common_refinement(f, g)
    diff = f.values - g.values
    return math.sqrt(math.fsum(f.widths * diff * diff))


def pav_isotonic(values, widths) -> np.ndarray:
    """Weighted L2 projection of ``values`` onto nondecreasing sequences.

    Pool-adjacent-violators with a block stack; each pooled block takes the
    width-weighted mean of its members.
    """
    v = np.asarray(values, dtype=float).reshape(-1)
    w = np.asarray(widths, dtype=float).reshape(-1)
    if v.shape != w.shape:
        raise LengthMismatch(f"{v.size} values but {w.size} widths")
    if np.any(w <= 0):
        raise ValueError("widths must be positive")
    n = v.size
    if n <= 1:
        return v.copy()
    # block stack: weighted sum, total weight, count
    sums = [0.0] * n
    wts = [0.0] * n
    counts = [0] * n
    top = -1
    for i in range(n):
        top += 1
        sums[top] = v[i] * w[i]
        wts[top] = w[i]
        counts[top] = 1
        while top > 0 and sums[top - 1] * wts[top] > sums[top] * wts[top - 1]:
            sums[top - 1] += sums[top]
            wts[top - 1] += wts[top]
            counts[top - 1] += counts[top]
            top -= 1
    out = np.empty(n)
    pos = 0
    for k in range(top + 1):
        out[pos : pos + counts[k]] = sums[k] / wts[k]
        pos += counts[k]
    return out


def project_monotone(q: QuantileFunction) -> QuantileFunction:
    """Isotonic projection of a step function in ``L^2(0, 1)``."""
    return QuantileFunction(q.breakpoints, pav_isotonic(q.values, q.widths), True)


def measure_from_quantile(q: QuantileFunction, tol: float = 1e-12) -> DiscreteMeasure:
    """Law of ``q`` under Lebesgue measure on ``(0, 1)``.

    Adjacent pieces with equal values merge into one atom. Decreases smaller
    than ``tol`` (relative to the value scale) are tolerated as rounding
    noise; anything larger raises :class:`NotMonotone`.
    """
    vals = q.values
    scale = 1.0 + float(np.max(np.abs(vals)))
    if np.any(np.diff(vals) < -tol * scale):
        raise NotMonotone("step function is not nondecreasing")
    starts = np.concatenate([[True], vals[1:] != vals[:-1]])
    group = np.cumsum(starts) - 1
    atoms = vals[starts]
    weights = np.zeros(len(atoms))
    np.add.at(weights, group, q.widths)
    return validate_normalize(atoms.reshape(-1, 1), weights)


__all__ = [
    "QuantileFunction",
    "quantile_of",
    "common_refinement",
    "w2_1d",
    "quantile_l2",
    "pav_isotonic",
    "project_monotone",
    "measure_from_quantile",
]
