"""Implicit weighted-Galerkin solver for the KdV equation with C1 cubic Hermite splines."""

from .spline import SplineSpace, SplineFunction, basis_eval, eval_spline, project_l2
from .weight import AffineWeight, SmoothedRampWeight, WeightConstant, weight_eval, compute_cr
from .quadrature import QuadratureRule, gauss_legendre, integrate_cells
from .assembly import (
    BandedPeriodicMatrix,
    SchemeOperators,
    assemble_weighted_mass,
    assemble_dispersion,
    assemble_nonlinear,
    build_operators,
    identity_check,
)
from .solver import (
    StepConfig,
    TimeStepRecord,
    StepFailure,
    FixedPointDivergence,
    CFLViolation,
    CFLWarning,
    solve_banded,
    cfl_check,
    fixed_point_step,
    advance,
    time_interpolant,
)
from . import analytic, diagnostics

__all__ = [
    "SplineSpace", "SplineFunction", "basis_eval", "eval_spline", "project_l2",
    "AffineWeight", "SmoothedRampWeight", "WeightConstant", "weight_eval", "compute_cr",
    "QuadratureRule", "gauss_legendre", "integrate_cells",
    "BandedPeriodicMatrix", "SchemeOperators", "assemble_weighted_mass",
    "assemble_dispersion", "assemble_nonlinear", "build_operators", "identity_check",
    "StepConfig", "TimeStepRecord", "StepFailure", "FixedPointDivergence",
    "CFLViolation", "CFLWarning", "solve_banded", "cfl_check", "fixed_point_step",
    "advance", "time_interpolant", "analytic", "diagnostics",
]
