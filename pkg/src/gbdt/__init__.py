"""Explicit solutions of continuous and discrete dynamical Schrodinger
systems by the GBDT form of the Backlund-Darboux transformation, with
residual checks for every identity the construction relies on."""

from .params import ParameterTriple, signature_j
from .continuous import (
    ContinuousState,
    PotentialSpec,
    darboux_matrix,
    dynamical_solution,
    evolve_closed_form,
    evolve_ode,
    l2_identity,
    transform_eigenfunction,
    transformed_potential,
    validate_triple,
    x_blocks,
    z_blocks,
)
from .discrete import (
    EigenBlocks,
    JacobiData,
    RecursionTrajectory,
    TransformedJacobi,
    build_initial_jacobi,
    discrete_solution,
    eigen_blocks,
    run_recursion,
    transform_jacobi,
    validate_discrete_triple,
    xi_tilde_checks,
)
from .asymptotics import (
    GrowthExponents,
    JordanSpectrum,
    empirical_growth_fit,
    exp_profile,
    growth_exponents,
)
from .linalg import herm_sqrt, is_posdef, mat_exp, solve_hpd

__version__ = "0.1.0"

__all__ = [
    "ParameterTriple",
    "signature_j",
    "ContinuousState",
    "PotentialSpec",
    "validate_triple",
    "evolve_closed_form",
    "evolve_ode",
    "x_blocks",
    "z_blocks",
    "transformed_potential",
    "dynamical_solution",
    "darboux_matrix",
    "transform_eigenfunction",
    "l2_identity",
    "JacobiData",
    "RecursionTrajectory",
    "TransformedJacobi",
    "EigenBlocks",
    "build_initial_jacobi",
    "validate_discrete_triple",
    "run_recursion",
    "transform_jacobi",
    "xi_tilde_checks",
    "eigen_blocks",
    "discrete_solution",
    "JordanSpectrum",
    "GrowthExponents",
    "growth_exponents",
    "exp_profile",
    "empirical_growth_fit",
    "mat_exp",
    "herm_sqrt",
    "is_posdef",
    "solve_hpd",
    "__version__",
]
