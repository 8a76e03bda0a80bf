"""Robust isoform abundance estimation with L1-penalized read-category biases."""

from .collapse import ReadTypeTable, collapse_read_types
from .genefile import GeneInstance, parse_gene_file, rpkm, write_gene_file
from .model import (
    DegenerateIsoformError,
    DimensionError,
    IdentifiabilityError,
    InfeasibleModelError,
    ModelError,
    PenaltyConfig,
    log_likelihood,
    penalized_objective,
    soft_threshold,
)
from .sim import SimulationSpec, evaluate_fit, generate_counts, run_study, run_table
from .solver import (
    FitConfig,
    FitResult,
    acs_fit,
    default_lambda,
    em_update_theta,
    fit,
    median_center,
    t_procedure,
    two_step_fit,
    update_b,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateIsoformError",
    "DimensionError",
    "IdentifiabilityError",
    "InfeasibleModelError",
    "ModelError",
    "PenaltyConfig",
    "log_likelihood",
    "penalized_objective",
    "soft_threshold",
    "FitConfig",
    "FitResult",
    "acs_fit",
    "default_lambda",
    "em_update_theta",
    "fit",
    "median_center",
    "t_procedure",
    "two_step_fit",
    "update_b",
    "ReadTypeTable",
    "collapse_read_types",
    "GeneInstance",
    "parse_gene_file",
    "rpkm",
    "write_gene_file",
    "SimulationSpec",
    "evaluate_fit",
    "generate_counts",
    "run_study",
    "run_table",
]
