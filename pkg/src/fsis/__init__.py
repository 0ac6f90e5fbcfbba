"""Sampling and closedness analysis for unions of shift-invariant spaces.

Generators are given by their Fourier transforms (piecewise closed-form
expressions or sampled fibers). Everything is computed fiber by fiber on a
frequency grid in ``[0, 1)^n``.
"""

from .config import DEFAULT_TOLERANCES, Tolerances
from .dsl import GeneratorSpec, Piece, PiecewiseSpec, parse_expression, parse_generator
from .fibers import (FiberWindow, FrequencyGrid, dimension_function, fiber_stack, fiber_window,
                     fiberize, midpoint_grid)
from .gramian import canonical_parseval, frame_analysis, hermitian_spectrum, sigma_squared
from .sampling import (SamplingReport, UnionModel, fd_injectivity, fd_stability, fd_union_report,
                       sis_injectivity, sis_stability, sis_union_report)
from .scenario import Scenario, load_scenario
from .subspaces import SubspacePair, Verdict, friedrichs_angle, friedrichs_fiber

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOLERANCES", "Tolerances", "GeneratorSpec", "Piece", "PiecewiseSpec",
    "parse_expression", "parse_generator", "FiberWindow", "FrequencyGrid",
    "dimension_function", "fiber_stack", "fiber_window", "fiberize", "midpoint_grid",
    "canonical_parseval", "frame_analysis", "hermitian_spectrum", "sigma_squared",
    "SamplingReport", "UnionModel", "fd_injectivity", "fd_stability", "fd_union_report",
    "sis_injectivity", "sis_stability", "sis_union_report", "Scenario", "load_scenario",
    "SubspacePair", "Verdict", "friedrichs_angle", "friedrichs_fiber",
]
