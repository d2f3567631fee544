"""Least-squares spectral methods over quasimatrices."""

from .blockop import BlockQuasimatrix, FunVec, block2x2_svd
from .errors import (
    IllPosedTLSError,
    NoEigenpairError,
    ProblemFileError,
    QuasispecError,
    ShapeError,
    SingularSystemError,
    SolverError,
)
from .funcore import ChebFun, chebpoly, constant, from_callable, from_coeffs, identity, legpoly, piecewise
from .lssolvers import (
    BasisGroup,
    BCTerm,
    BoundaryFunctional,
    EigProblem,
    EigResult,
    OperatorExpr,
    SolverConfig,
    krylov_subspace,
    lseig,
    lseig_bc,
    lsode,
)
from .pseudospectra import PseudoGrid, grid_eval, sigma_min_at
from .quasimatrix import Quasimatrix
from .rectgep import dense_gep, itomurota_block, itomurota_discrete, min_perturbation

__version__ = "0.1.0"

__all__ = [
    "BCTerm",
    "BasisGroup",
    "BlockQuasimatrix",
    "BoundaryFunctional",
    "ChebFun",
    "EigProblem",
    "EigResult",
    "FunVec",
    "IllPosedTLSError",
    "NoEigenpairError",
    "OperatorExpr",
    "ProblemFileError",
    "PseudoGrid",
    "Quasimatrix",
    "QuasispecError",
    "ShapeError",
    "SingularSystemError",
    "SolverConfig",
    "SolverError",
    "block2x2_svd",
    "chebpoly",
    "constant",
    "dense_gep",
    "from_callable",
    "from_coeffs",
    "grid_eval",
    "identity",
    "itomurota_block",
    "itomurota_discrete",
    "krylov_subspace",
    "legpoly",
    "lseig",
    "lseig_bc",
    "lsode",
    "min_perturbation",
    "piecewise",
    "sigma_min_at",
]
