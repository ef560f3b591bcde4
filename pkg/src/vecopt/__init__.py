"""Black-box vector optimization under polyhedral cone orders."""

from vecopt.cones import (
    Cone,
    Order,
    cone_from_dict,
    cone_from_matrix,
    cone_icecream_3d,
    cone_theta_2d,
    componentwise_cone,
)
from vecopt.regions import EllipsoidRegion, RectRegion
from vecopt.models import EmpiricalModel, GPModel, Observation, PosteriorSummary
from vecopt.problems import EvalQuery, TabularProblem, evaluate, ground_truth_pareto, load_csv
from vecopt.algorithms import (
    AlgConfig,
    RunResult,
    decoupled_paveba_run,
    gp_pal_run,
    naive_elimination,
    paveba_run,
)
from vecopt.metrics import eps_f1, hv_discrepancy, hypervolume

__version__ = "0.1.0"

__all__ = [
    "AlgConfig",
    "Cone",
    "EllipsoidRegion",
    "EmpiricalModel",
    "EvalQuery",
    "GPModel",
    "Observation",
    "Order",
    "PosteriorSummary",
    "RectRegion",
    "RunResult",
    "TabularProblem",
    "componentwise_cone",
    "cone_from_dict",
    "cone_from_matrix",
    "cone_icecream_3d",
    "cone_theta_2d",
    "decoupled_paveba_run",
    "eps_f1",
    "evaluate",
    "gp_pal_run",
    "ground_truth_pareto",
    "hv_discrepancy",
    "hypervolume",
    "load_csv",
    "naive_elimination",
    "paveba_run",
]
