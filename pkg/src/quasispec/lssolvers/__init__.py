"""Least-squares ODE solvers: LSode, LSeig, LSeig-bc and problem builders."""

from .operators import (
    BasisGroup,
    BCTerm,
    BoundaryFunctional,
    EigProblem,
    EigResult,
    OperatorExpr,
    SolverConfig,
    Term,
    apply_operator,
    assemble,
    bc_matrices,
    continuity_rows,
    dirichlet,
)
from .krylov import AdaptiveLsodeSolver, chebyshev_basis, krylov_subspace, piecewise_chebyshev_basis
from .solvers import lseig, lseig_bc, lsode, pair_residuals, relative_residual_matrix
from .ultraspherical import UltrasphericalSolver

__all__ = [
    "AdaptiveLsodeSolver",
    "UltrasphericalSolver",
    "chebyshev_basis",
    "krylov_subspace",
    "piecewise_chebyshev_basis",
    "BasisGroup",
    "BCTerm",
    "BoundaryFunctional",
    "EigProblem",
    "EigResult",
    "OperatorExpr",
    "SolverConfig",
    "Term",
    "apply_operator",
    "assemble",
    "bc_matrices",
    "continuity_rows",
    "dirichlet",
    "lseig",
    "lseig_bc",
    "lsode",
    "pair_residuals",
    "relative_residual_matrix",
]
