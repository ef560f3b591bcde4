"""Numeric tolerances shared by every module.

Library code reads the module-level ``POLICY``. ``pgd_decrease_tol`` is
relative to the current squared set distance.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class NumericPolicy:
    # cone_order
    membership_tol: float = 1e-12
    rank_rtol: float = 1e-9
    interior_tol: float = 1e-9
    # confidence_geometry
    region_tol: float = 1e-9
    solver_tol: float = 1e-6
    pgd_decrease_tol: float = 1e-12
    pgd_max_iter: int = 10_000
    dykstra_feas_tol: float = 1e-8
    dykstra_step_tol: float = 1e-14
    dykstra_max_sweeps: int = 50_000
    # surrogate_models
    scale_floor: float = 1e-12
    jitter_start: float = 1e-8
    jitter_max: float = 1e-4


POLICY = NumericPolicy()
