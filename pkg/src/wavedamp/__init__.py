"""Boundary-feedback stabilization workbench for the 2-D wave equation.

Designs mixed Dirichlet/Neumann boundary conditions from a rotated
multiplier field, verifies their admissibility, simulates the damped
semi-discrete wave system on the unit square, and measures energy decay
rates both in the time domain and spectrally.
"""

from ._backend import kernel_backend
from .discretization import (
    DiscreteOperators,
    Grid,
    assemble_operators,
    build_grid,
    discrete_energy,
    sine_mode_initial,
)
from .dynamics import (
    EnergyTrace,
    Linear,
    PowerLaw,
    fit_exponential_rate,
    fit_power_rate,
    komornik_check,
    simulate,
    step,
)
from .errors import NoAdmissiblePivot, NonconvergenceError, NumericalError
from .geometry import (
    Belt,
    BoundaryPartition,
    EdgeClassification,
    EdgeLabel,
    InterfacePoint,
    MultiplierField,
    PolygonDomain,
    admissible_region,
    build_partition,
    check_conditions,
    classify_edge,
    edge_belt,
    eval_multiplier,
    lower_left_dirichlet_partition,
    unit_square,
)
from .rellich import CATALOG, SmoothTestFunction, rellich_residual
from .spectral import CompanionMatrix, companion_matrix, eigenvalues, spectral_abscissa
from .sweep import SweepRecord, d_theta_point, emit, run_sweep

__version__ = "0.1.0"

__all__ = [
    "Belt",
    "BoundaryPartition",
    "CATALOG",
    "CompanionMatrix",
    "DiscreteOperators",
    "EdgeClassification",
    "EdgeLabel",
    "EnergyTrace",
    "Grid",
    "InterfacePoint",
    "Linear",
    "MultiplierField",
    "NoAdmissiblePivot",
    "NonconvergenceError",
    "NumericalError",
    "PolygonDomain",
    "PowerLaw",
    "SmoothTestFunction",
    "SweepRecord",
    "admissible_region",
    "assemble_operators",
    "build_grid",
    "build_partition",
    "check_conditions",
    "classify_edge",
    "companion_matrix",
    "d_theta_point",
    "discrete_energy",
    "edge_belt",
    "eigenvalues",
    "emit",
    "eval_multiplier",
    "fit_exponential_rate",
    "fit_power_rate",
    "kernel_backend",
    "komornik_check",
    "lower_left_dirichlet_partition",
    "rellich_residual",
    "run_sweep",
    "simulate",
    "sine_mode_initial",
    "spectral_abscissa",
    "step",
    "unit_square",
]
