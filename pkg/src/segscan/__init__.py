"""Offline change point detection for multivariate signals.

Fit a segment cost model to a signal, then search for the segmentation that
minimizes the summed cost under a fixed change count, a per-change penalty
or a contrast budget.  Exact dynamic programming and pruned exact search sit
next to three fast approximations, plus metrics for comparing segmentations
and generators for synthetic benchmarks.
"""

from . import exceptions
from .core import (
    Breakpoints,
    DetectionResult,
    Signal,
    sum_of_costs,
    validate_breakpoints,
    validate_signal,
)
from .costs import AUTO_METRIC, MEDIAN_HEURISTIC, CostSpec, FittedCost, fit, median_heuristic
from .generators import GenSpec, draw_bkps, pw_constant, pw_linear, pw_normal
from .metrics import PrecisionRecall, hausdorff, precision_recall, rand_index
from .search import (
    SearchConfig,
    StoppingRule,
    binseg,
    bottomup,
    dynp,
    max_changes,
    pelt,
    solve_budget,
    window,
)
from .svgplot import render_svg

__version__ = "0.1.0"

__all__ = [
    "AUTO_METRIC",
    "Breakpoints",
    "CostSpec",
    "DetectionResult",
    "FittedCost",
    "GenSpec",
    "MEDIAN_HEURISTIC",
    "PrecisionRecall",
    "SearchConfig",
    "Signal",
    "StoppingRule",
    "__version__",
    "binseg",
    "bottomup",
    "draw_bkps",
    "dynp",
    "exceptions",
    "fit",
    "hausdorff",
    "max_changes",
    "median_heuristic",
    "pelt",
    "precision_recall",
    "pw_constant",
    "pw_linear",
    "pw_normal",
    "rand_index",
    "render_svg",
    "solve_budget",
    "sum_of_costs",
    "validate_breakpoints",
    "validate_signal",
    "window",
]
