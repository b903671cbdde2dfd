"""Finite-dimensional white-noise calculus over chosen supertranslation directions."""

from .basis import ChaosBasis, DirectionSet, HermiteSeries, chaos_basis
from .operators import (
    adjoint_Dstar,
    gamma_A_norm,
    gateaux_D,
    gaussian_inner,
    gaussian_norm,
    ladder_matrix,
    multiplication_matrix,
    multiply_Q,
    project_Pi_V,
    OperatorMatrix,
)
from .sampling import characteristic_functional, eval_at_sample, hermite_values
from .transforms import (
    SPolynomial,
    fourier_F,
    fourier_gauss,
    fourier_gauss_matrix,
    s_inverse,
    s_transform,
)

__all__ = [
    "ChaosBasis",
    "DirectionSet",
    "HermiteSeries",
    "chaos_basis",
    "gaussian_inner",
    "gaussian_norm",
    "eval_at_sample",
    "hermite_values",
    "multiply_Q",
    "gateaux_D",
    "adjoint_Dstar",
    "gamma_A_norm",
    "project_Pi_V",
    "ladder_matrix",
    "multiplication_matrix",
    "OperatorMatrix",
    "s_transform",
    "s_inverse",
    "SPolynomial",
    "fourier_F",
    "fourier_gauss",
    "fourier_gauss_matrix",
    "characteristic_functional",
]
