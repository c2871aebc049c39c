"""Metric extrapolation of W2 geodesics beyond their endpoint.

``extrapolate(nu0, nu1, t)`` returns the minimizer over ``rho`` of

    W2(rho, nu1)^2 / (2 (t-1)) - W2(rho, nu0)^2 / (2 t),

the time-``t`` point of the geodesic that starts at ``nu0`` and passes
through ``nu1`` at time one, extended past ``nu1``.

The functional is a difference of convex terms, so it is never minimized
directly. In dimension one the minimizer has quantile function
``P(t X_nu1 + (1-t) X_nu0)`` with ``P`` the isotonic projection. In any
dimension it is obtained from one backward projection: with
``theta = (t-1)/t``, project ``D^{1/theta} nu1`` below ``nu0``; the
barycentric image ``z_i`` of the dilated atom ``x_i / theta`` gives the
extrapolated atom ``t x_i + (1-t) z_i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import TimeNotGreaterThanOne
from .measures import DiscreteMeasure, dilate, same_dim, validate_normalize
from .ot_core import w2
from .projections import (
    DEFAULT_CONFIG,
    BackwardSolution,
    SolverConfig,
    backward_project,
)
from .quantile1d import (
    QuantileFunction,
    common_refinement,
    measure_from_quantile,
    pav_isotonic,
    quantile_of,
)

METHODS = ("auto", "pav", "reduction")


def _check_t(t) -> float:
    t = float(t)
    if not t > 1:
        raise TimeNotGreaterThanOne(f"extrapolation time must exceed 1, got {t}")
    return t


@dataclass(frozen=True, eq=False)
class ExtrapolationResult:
    """Output of the reduction path.

    Attributes
    ----------
    extrapolated : DiscreteMeasure
        Geodesic point at time ``t``; atom ``i`` is the image of atom ``i``
        of ``nu1``.
    start : DiscreteMeasure
        Geodesic point at time zero, the backward projection of the dilated
        ``nu1`` below ``nu0``; atom ``i`` is the image of atom ``i`` of ``nu1``.
    backward : BackwardSolution or None
        The underlying solver output (``None`` on the 1D path).
    """

    extrapolated: DiscreteMeasure
    start: DiscreteMeasure
    t: float
    backward: Optional[BackwardSolution] = None


def extrapolate_pav(nu0: DiscreteMeasure, nu1: DiscreteMeasure, t: float) -> DiscreteMeasure:
    """One-dimensional extrapolation by isotonic regression of quantiles."""
    t = _check_t(t)
    f0, f1 = common_refinement(quantile_of(nu0), quantile_of(nu1))
    y = pav_isotonic(t * f1.values + (1.0 - t) * f0.values, f1.widths)
    return measure_from_quantile(QuantileFunction(f1.breakpoints, y, False))


def extrapolate_reduction(
    nu0: DiscreteMeasure,
    nu1: DiscreteMeasure,
    t: float,
    cfg: SolverConfig = DEFAULT_CONFIG,
) -> ExtrapolationResult:
    """Extrapolation through one backward projection, in any dimension."""
    same_dim(nu0, nu1)
    t = _check_t(t)
    theta = (t - 1.0) / t
    sol = backward_project(dilate(nu1, 1.0 / theta), nu0, cfg)
    z = sol.map.images
    x = nu1.atoms
    ext = t * x + (1.0 - t) * z
    return ExtrapolationResult(
        extrapolated=validate_normalize(ext, nu1.weights),
        start=validate_normalize(z, nu1.weights),
        t=t,
        backward=sol,
    )


def extrapolate(
    nu0: DiscreteMeasure,
    nu1: DiscreteMeasure,
    t: float,
    cfg: SolverConfig = DEFAULT_CONFIG,
    method: str = "auto",
) -> DiscreteMeasure:
    """Metric extrapolation at time ``t > 1``.

    Parameters
    ----------
    nu0, nu1 : DiscreteMeasure
        Geodesic points at times zero and one.
    t : float
        Target time, strictly greater than one.
    method : {"auto", "pav", "reduction"}
        ``"auto"`` uses the isotonic path in dimension one and the backward
        reduction otherwise.
    """
    same_dim(nu0, nu1)
    t = _check_t(t)
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if method == "pav" or (method == "auto" and nu0.dim == 1):
        return extrapolate_pav(nu0, nu1, t)
    return extrapolate_reduction(nu0, nu1, t, cfg).extrapolated


def extrapolation_functional(rho, nu0, nu1, t) -> float:
    """``W2(rho, nu1)^2 / (2(t-1)) - W2(rho, nu0)^2 / (2t)``."""
    t = _check_t(t)
    d1 = w2(rho, nu1)
    d0 = w2(rho, nu0)
    return d1 * d1 / (2.0 * (t - 1.0)) - d0 * d0 / (2.0 * t)


def g_functional(mu, nu0, nu1, t) -> float:
    """``t W2(nu1, mu)^2 / 2 - (t-1) W2(nu0, mu)^2 / 2``.

    Equal to ``t (t-1)`` times :func:`extrapolation_functional`; strongly
    convex along generalized geodesics, with the extrapolation as minimizer.
    """
    t = _check_t(t)
    d1 = w2(nu1, mu)
    d0 = w2(nu0, mu)
    return 0.5 * t * d1 * d1 - 0.5 * (t - 1.0) * d0 * d0


def quantile_extrapolation(nu0, nu1, t):
    """Quantile values of the 1D extrapolation on the common grid of the inputs.

    Returns ``(breakpoints, values)``; used by strong-convexity checks that
    need the extrapolation as a function on ``(0, 1)``.
    """
    t = _check_t(t)
    f0, f1 = common_refinement(quantile_of(nu0), quantile_of(nu1))
    y = pav_isotonic(t * f1.values + (1.0 - t) * f0.values, f1.widths)
    return f1.breakpoints, y


__all__ = [
    "ExtrapolationResult",
    "extrapolate",
    "extrapolate_pav",
    "extrapolate_reduction",
    "extrapolation_functional",
    "g_functional",
    "quantile_extrapolation",
]
