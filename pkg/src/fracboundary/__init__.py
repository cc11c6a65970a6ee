"""Numerical laboratory for boundary behaviour of nonlocal nonlinear
Dirichlet problems: exterior-value solver, fractional capacities, dyadic
shell profiles, and boundary-point classification on a reproducible gallery
of example domains."""

__version__ = "0.1.0"

from .capacity import (
    CapacityResult,
    ProbeResult,
    ScalingSlope,
    WienerProfile,
    capacity_scaling_slope,
    condenser_capacity,
    sobolev_capacity,
    wiener_profile,
    zero_capacity_probe,
)
from .classify import (
    ClassificationReport,
    SequenceProbeReport,
    SweepResult,
    classify_point,
    decide_label,
    gallery_mask,
    geometric_oracle,
    removability_experiment,
    sharpness_experiment,
    sp_sweep,
    universal_sequence_probe,
)
from .cli import ExperimentConfig, emit_plot, example_config, run
from .domains import (
    DataSpec,
    DomainMask,
    Lattice,
    dist_cap_data,
    make_ball,
    make_comb,
    make_exterior_block,
    make_halfspace_slit,
    make_punctured_ball,
)
from .energy import EnergyBreakdown, energy_gradient, energy_total, tail_quantity
from .errors import (
    ConfigError,
    ContractError,
    DomainError,
    FracBoundaryError,
    ReportIOError,
)
from .kernel import KernelSpec, WeightTable, build_weight_table
from .solve import SolveReport, capacitary_potential, dirichlet_solve

__all__ = [
    "CapacityResult",
    "ClassificationReport",
    "ConfigError",
    "ContractError",
    "DataSpec",
    "DomainError",
    "DomainMask",
    "EnergyBreakdown",
    "ExperimentConfig",
    "FracBoundaryError",
    "KernelSpec",
    "Lattice",
    "ProbeResult",
    "ReportIOError",
    "ScalingSlope",
    "SequenceProbeReport",
    "SolveReport",
    "SweepResult",
    "WeightTable",
    "WienerProfile",
    "__version__",
    "build_weight_table",
    "capacitary_potential",
    "capacity_scaling_slope",
    "classify_point",
    "condenser_capacity",
    "decide_label",
    "dirichlet_solve",
    "dist_cap_data",
    "emit_plot",
    "energy_gradient",
    "energy_total",
    "example_config",
    "gallery_mask",
    "geometric_oracle",
    "make_ball",
    "make_comb",
    "make_exterior_block",
    "make_halfspace_slit",
    "make_punctured_ball",
    "removability_experiment",
    "run",
    "sharpness_experiment",
    "sobolev_capacity",
    "sp_sweep",
    "universal_sequence_probe",
    "wiener_profile",
    "zero_capacity_probe",
]
