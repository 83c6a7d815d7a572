"""Wasserstein-distance scenario reduction toolkit.

Reduce an n-point discrete distribution to m atoms, either restricted to the
original support (discrete reduction) or with freely placed atoms
(continuous reduction). Ships exact enumeration solvers, greedy / k-means /
local-search heuristics with the known guarantees, closed-form worst-case
bounds with their tight instances, mixed-integer model export, and a color
quantization application.
"""

from .core import (BudgetExceededError, ConvergenceError, DiscreteDistribution,
                   Metric, Partition, ReductionResult, ValidationError, validate)
from .exact import (MilpModel, continuous_exact, discrete_exact,
                    export_milp_continuous, export_milp_discrete, stirling2)
from .geometry import (DistanceMatrix, centroid, distance_matrix, enclosing_ball,
                       geometric_median, mean_point, powered_distance)
from .heuristics import (continuous_polish, dupacova_greedy,
                         k_means_generalized, local_search)
from .limits import (BoundReport, ExperimentTable, a_priori_m, gen_adversarial,
                     gen_kappa_tight, gen_worst_case, limit_bounds,
                     normal_experiment)
from .quantize import (GapReport, ImageRaster, bundled_image, image_histogram,
                       pre_reduce, quantize_image, read_ppm, write_ppm)
from .transport import TransportPlan, dist_to_support, wasserstein

__version__ = "0.1.0"

__all__ = [
    "BoundReport", "BudgetExceededError", "ConvergenceError", "DiscreteDistribution",
    "DistanceMatrix", "ExperimentTable", "GapReport", "ImageRaster", "Metric",
    "MilpModel", "Partition", "ReductionResult", "TransportPlan", "ValidationError",
    "a_priori_m", "bundled_image", "centroid", "continuous_exact",
    "continuous_polish", "discrete_exact", "dist_to_support", "distance_matrix",
    "dupacova_greedy", "enclosing_ball", "export_milp_continuous",
    "export_milp_discrete", "gen_adversarial", "gen_kappa_tight", "gen_worst_case",
    "geometric_median", "image_histogram", "k_means_generalized", "limit_bounds",
    "local_search", "mean_point", "normal_experiment", "powered_distance",
    "pre_reduce", "quantize_image", "read_ppm", "stirling2", "validate",
    "wasserstein", "write_ppm",
]
