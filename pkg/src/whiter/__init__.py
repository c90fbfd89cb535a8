"""Iterative solution of triangular Wiener-Hopf systems with exponential factors."""
from .analytic_core import (
    AnalyticHandle,
    HalfPlaneFunction,
    LineGrid,
    LineSamples,
    Strip,
)
from .splitting import (
    additive_split,
    cauchy_eval,
    multiplicative_split,
    shift_line,
    winding_index,
)
from .whsolver import ProblemSpec, SolverOptions, reduce, residual, solve

__all__ = [
    "AnalyticHandle",
    "HalfPlaneFunction",
    "LineGrid",
    "LineSamples",
    "ProblemSpec",
    "SolverOptions",
    "Strip",
    "additive_split",
    "cauchy_eval",
    "multiplicative_split",
    "reduce",
    "residual",
    "shift_line",
    "solve",
    "winding_index",
]
__version__ = "0.1.0"
