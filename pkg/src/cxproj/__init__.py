"""W2 projections in convex order and metric extrapolation for discrete measures."""

from .convex_order import OrderResult, check_convex_order, random_convex_witness_test
from .errors import CxError
from .extrapolation import extrapolate, extrapolation_functional, g_functional
from .measures import DiscreteMeasure, dilate, load, measure, moments, save, validate_normalize
from .ot_core import Coupling, geodesic_point, w2, w2_lp
from .projections import (
    BackwardSolution,
    SolverConfig,
    backward_project,
    backward_project_1d,
    forward_project,
    forward_project_1d,
)
from .quantile1d import QuantileFunction, pav_isotonic, quantile_of, w2_1d

__version__ = "0.1.0"

__all__ = [
    "BackwardSolution",
    "Coupling",
    "CxError",
    "DiscreteMeasure",
    "OrderResult",
    "QuantileFunction",
    "SolverConfig",
    "backward_project",
    "backward_project_1d",
    "check_convex_order",
    "dilate",
    "extrapolate",
    "extrapolation_functional",
    "forward_project",
    "forward_project_1d",
    "g_functional",
    "geodesic_point",
    "load",
    "measure",
    "moments",
    "pav_isotonic",
    "quantile_of",
    "random_convex_witness_test",
    "save",
    "validate_normalize",
    "w2",
    "w2_1d",
    "w2_lp",
]
