"""Delayed Caputo fractional diffusion: simulation, regional controllability and HUM control."""

from .controllability import (
    DiscreteSystem,
    GramianReport,
    adjoint_kernel_row,
    discrete_system,
    gramian,
    gramian_by_impulses,
    is_region_controllable,
)
from .fracops import (
    ControlSignal,
    FracParams,
    IntegrabilityError,
    Trajectory,
    mild_solution,
    rr_apply,
    sr_apply,
)
from .hum import HumSolution, RankDeficiencyError, energy, free_final_state, solve_hum, verify
from .mittag_leffler import MittagLefflerError, MLParams, ml2, ml3, wright_density
from .spectral import (
    Pointwise,
    Region,
    Zonal,
    actuator_coeffs,
    eigenfunction_at,
    eigenvalue,
    region_gram,
    restrict,
    zero_extend_gram_apply,
)

__version__ = "0.1.0"

__all__ = [
    "actuator_coeffs",
    "adjoint_kernel_row",
    "ControlSignal",
    "discrete_system",
    "DiscreteSystem",
    "eigenfunction_at",
    "eigenvalue",
    "energy",
    "FracParams",
    "free_final_state",
    "gramian",
    "gramian_by_impulses",
    "GramianReport",
    "HumSolution",
    "IntegrabilityError",
    "is_region_controllable",
    "mild_solution",
    "MittagLefflerError",
    "ml2",
    "ml3",
    "MLParams",
    "Pointwise",
    "RankDeficiencyError",
    "Region",
    "region_gram",
    "restrict",
    "rr_apply",
    "solve_hum",
    "sr_apply",
    "Trajectory",
    "verify",
    "wright_density",
    "zero_extend_gram_apply",
    "Zonal",
]
