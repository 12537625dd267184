"""Quasi-exactly solvable spectrum of the two-channel harmonic vibronic model."""

from .model import (
    LevelParams,
    ModelParams,
    PhysicalParams,
    channel_swap,
    exceptional_energy,
    gauge_envelope,
    level_params,
    to_dimensionless,
    to_physical_coordinate,
)
from .polyop import DiffOperator, Polynomial, apply, commutator, compose, poly_roots
from .sl2 import (
    QesCoefficients,
    allowed_couplings,
    build_general_qes,
    build_h4,
    make_generators,
    project_invariant_subspace,
    qes_condition_check,
)
from .bethe import BetheSolution, bethe_residues, constraint_residual, solve_bethe, wavefunctions
from .oracle import OracleConfig, SpectrumReport, coupled_matrix, match_exceptional, position_matrix, spectrum

__version__ = "0.1.0"

__all__ = [
    "LevelParams",
    "ModelParams",
    "PhysicalParams",
    "channel_swap",
    "exceptional_energy",
    "gauge_envelope",
    "level_params",
    "to_dimensionless",
    "to_physical_coordinate",
    "DiffOperator",
    "Polynomial",
    "apply",
    "commutator",
    "compose",
    "poly_roots",
    "QesCoefficients",
    "allowed_couplings",
    "build_general_qes",
    "build_h4",
    "make_generators",
    "project_invariant_subspace",
    "qes_condition_check",
    "BetheSolution",
    "bethe_residues",
    "constraint_residual",
    "solve_bethe",
    "wavefunctions",
    "OracleConfig",
    "SpectrumReport",
    "coupled_matrix",
    "match_exceptional",
    "position_matrix",
    "spectrum",
]
