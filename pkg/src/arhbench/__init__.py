"""Simulation and benchmarking of componentwise ARH(1) estimators."""

__version__ = "0.1.0"

from .componentwise import (
    DiagEstimate,
    MatrixEstimate,
    TruncationKind,
    TruncationRule,
    bosq,
    check_prop2_conditions,
    diag_known,
    diag_unknown,
    guillas,
    k_of,
    predict,
)
from .empirical import EmpiricalMoments, SpectralPair, eigendecompose, moments, project_onto, sign_align
from .grid import BasisSystem, Curve, Grid, inner_product, make_grid, project, reconstruct, sine_basis
from .scenario import Regime, ScenarioOperators, ScenarioSpec, validate
from .simulate import CoeffSeries, curves_of, simulate

__all__ = [
    "BasisSystem", "CoeffSeries", "Curve", "DiagEstimate", "EmpiricalMoments", "Grid",
    "MatrixEstimate", "Regime", "ScenarioOperators", "ScenarioSpec", "SpectralPair",
    "TruncationKind", "TruncationRule", "bosq", "check_prop2_conditions", "curves_of",
    "diag_known", "diag_unknown", "eigendecompose", "guillas", "inner_product", "k_of",
    "make_grid", "moments", "predict", "project", "project_onto", "reconstruct",
    "sign_align", "simulate", "sine_basis", "validate",
]
