"""LSode, LSeig and LSeig-bc."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
import scipy.linalg

from ..blockop import BlockQuasimatrix, block_qr_coords
from ..errors import ShapeError, SingularSystemError
from ..funcore import ChebFun
from ..quasimatrix import L2Frame, Quasimatrix, qr_coords
from ..rectgep import dense_gep, itomurota_block, normalize_columns
from .operators import (
    BasisGroup,
    BoundaryFunctional,
    EigProblem,
    EigResult,
    OperatorExpr,
    SolverConfig,
    assemble,
    bc_matrices,
    bc_values,
)

__all__ = [
    "lsode",
    "lseig",
    "lseig_bc",
    "relative_residual_matrix",
    "pair_residuals",
    "pencil_coords",
]

SINGULAR_RTOL = 1e-14
BC_CHECK_RTOL = 1e-10
BC_CHECK_RTOL_LAMBDA = 1e-8


def pencil_coords(*blocks: BlockQuasimatrix, min_rank: int = 0):
    """Stacked L2 coordinates ``[V_top; bottom]`` of blocks in one shared frame."""
    cols = [c for b in blocks for c in b.top.columns]
    frame = L2Frame.for_functions(cols, min_rank=min_rank)
    out, k = [], 0
    V = frame.coords(cols)
    for b in blocks:
        out.append(np.vstack([V[:, k : k + b.n], b.bottom]))
        k += b.n
    return frame, out


def pair_residuals(MA: np.ndarray, MB: np.ndarray, lambdas, X) -> np.ndarray:
    """``||A x_k - lambda_k B x_k|| / ||A x_k||`` for coordinate matrices."""
    AX, BX = MA @ X, MB @ X
    lam = np.asarray(lambdas)
    finite = np.isfinite(lam)
    R = AX - BX * np.where(finite, lam, 0)[None, :]
    den = np.linalg.norm(AX, axis=0)
    num = np.linalg.norm(R, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(den > 0, num / den, np.where(num == 0, 0.0, np.inf))
    rel[~finite] = np.inf
    return rel


def relative_residual_matrix(A, B, V, lambdas) -> float:
    """``||A V - B V Lambda||_2 / ||A V||_2`` with block 2-norms."""
    A = A if isinstance(A, BlockQuasimatrix) else BlockQuasimatrix(A)
    B = B if isinstance(B, BlockQuasimatrix) else BlockQuasimatrix(B)
    _, (MA, MB) = pencil_coords(A, B)
    V = np.asarray(V, dtype=np.complex128)
    if V.ndim == 1:
        V = V[:, None]
    lam = np.atleast_1d(np.asarray(lambdas, dtype=np.complex128))
    AV = MA @ V
    R = AV - (MB @ V) * lam[None, :]
    den = np.linalg.norm(AV, 2)
    return float(np.linalg.norm(R, 2) / den) if den > 0 else 0.0


# --------------------------------------------------------------------------
# LSode
# --------------------------------------------------------------------------

def _as_groups(basis, op: OperatorExpr | None) -> list[BasisGroup]:
    if isinstance(basis, Quasimatrix):
        if op is None:
            raise ValueError("an operator is required with a plain quasimatrix basis")
        return [BasisGroup(basis, op)]
    groups = list(basis)
    if not all(isinstance(g, BasisGroup) for g in groups):
        raise TypeError("basis must be a Quasimatrix or a list of BasisGroup")
    return groups


def _check_triangular(R: np.ndarray):
    dg = np.abs(np.diagonal(R))
    if dg.size == 0:
        return
    if dg.min() <= SINGULAR_RTOL * dg.max():
        raise SingularSystemError(
            f"assembled least-squares system is numerically singular "
            f"(|R_jj| ratio {dg.min() / dg.max() if dg.max() else 0.0:.1e}); try a different or smaller basis"
        )


def lsode(
    op: OperatorExpr | None,
    f: ChebFun,
    basis,
    bcs: Sequence[BoundaryFunctional] = (),
    config: SolverConfig | None = None,
    return_coeffs: bool = False,
):
    """Least-squares solution of ``L u = f`` with boundary rows ``B c = f_b``.

    ``basis`` is a quasimatrix (then ``op`` acts on its columns) or a list of
    :class:`BasisGroup` (then each group's ``exprA`` is used unless ``op`` is
    given, in which case ``op`` acts on the group's solution columns).
    Returns ``(u, residual)``, plus the coefficient vector when
    ``return_coeffs`` is set.  ``residual`` is the weighted function-vector
    norm of ``[L u - f; B c - f_b]``.
    """
    cfg = config or SolverConfig()
    groups = _as_groups(basis, op)
    bcs = list(bcs)
    if any(bc.depends_on_lambda for bc in bcs):
        raise ValueError("lsode boundary conditions cannot depend on lambda")
    cols = []
    for g in groups:
        if op is not None:
            cols.extend(op(c) for c in g.solution_columns.columns)
        else:
            cols.extend(g.exprA(c) for c in g.columns.columns)
    n, d = len(cols), len(bcs)
    if d > n:
        raise ShapeError(f"{d} boundary rows exceed {n} basis columns")
    BA, _ = bc_matrices(bcs, groups)
    fb = bc_values(bcs)
    frame = L2Frame.for_functions(cols + [f], min_rank=n)
    V = frame.coords(cols + [f])
    sa, sb = math.sqrt(cfg.alpha), math.sqrt(cfg.beta)
    Vu, vf = sa * V[:, :n], sa * V[:, n]
    Bw, fbw = sb * BA, sb * fb

    if cfg.bc_mode == "exact" and d > 0:
        if d >= n:
            raise ShapeError("exact boundary conditions need more columns than conditions")
        Qc, Rt = qr_coords(Vu, frame)
        UR, _, _ = np.linalg.svd(Rt)
        U1 = Qc @ UR[:, : n - d]
        M = np.vstack([U1.conj().T @ Vu, Bw])
        rhs = np.concatenate([U1.conj().T @ vf, fbw])
        if np.linalg.cond(M) > 1 / SINGULAR_RTOL:
            raise SingularSystemError("projected system is numerically singular; try a different basis")
        c = np.linalg.solve(M, rhs)
    else:
        _, Qt, Qb, R = block_qr_coords(Vu, Bw, frame)
        _check_triangular(R)
        rhs = Qt.conj().T @ vf + Qb.conj().T @ fbw
        c = scipy.linalg.solve_triangular(R, rhs)

    res = math.sqrt(float(np.linalg.norm(Vu @ c - vf) ** 2 + np.linalg.norm(Bw @ c - fbw) ** 2))
    sol_cols = [col for g in groups for col in g.solution_columns.columns]
    u = Quasimatrix(sol_cols).apply(c)
    return (u, res, c) if return_coeffs else (u, res)


# --------------------------------------------------------------------------
# LSeig
# --------------------------------------------------------------------------

def _balance(MA: np.ndarray, MB: np.ndarray, cfg: SolverConfig) -> float:
    if not cfg.balance:
        return 1.0
    nb = np.linalg.norm(MB)
    na = np.linalg.norm(MA)
    return na / nb if nb > 0 and na > 0 else 1.0


def _column_scales(MA: np.ndarray, MB: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    n = MA.shape[1]
    if not cfg.scale_columns:
        return np.ones(n)
    s = np.sqrt(np.linalg.norm(MA, axis=0) ** 2 + np.linalg.norm(MB, axis=0) ** 2)
    s[s == 0] = 1.0
    return s


def _balanced_rows(MA: np.ndarray, MB: np.ndarray, d: int, nu: float):
    """``A_top / nu`` with the boundary rows of both sides scaled by ``nu``.

    Scaling a row pair of both pencils by one factor keeps every exact
    eigenpair, so this is plain nu-balancing that leaves the boundary rows
    at their configured weight instead of shrinking them with A.
    """
    if nu == 1.0:
        return MA, MB
    m = MA.shape[0] - d
    MA2, MB2 = MA.copy(), MB.copy()
    MA2[:m] /= nu
    MB2[m:] *= nu
    return MA2, MB2


def _rescale(lam: np.ndarray, nu: float) -> np.ndarray:
    out = lam.copy()
    fin = np.isfinite(lam)
    out[fin] *= nu
    return out


def _results(problem, MA, MB, lambdas, X, bc_ok=None) -> list[EigResult]:
    X = normalize_columns(X)
    rel = pair_residuals(MA, MB, lambdas, X)
    tol = problem.config.tol
    keep = [k for k in range(len(lambdas)) if np.isfinite(lambdas[k]) and rel[k] <= tol]
    if bc_ok is not None:
        keep = [k for k in keep if bc_ok[k]]
    S = problem.solution_basis()
    if problem.bcs:
        BA, BB = bc_matrices(problem.bcs, problem.groups)
    out = []
    for k in keep:
        c = X[:, k]
        bcr = float(np.linalg.norm((BA - lambdas[k] * BB) @ c)) if problem.bcs else 0.0
        out.append(EigResult(complex(lambdas[k]), c, S.apply(c), float(rel[k]), bcr))
    return out


def lseig(problem: EigProblem) -> list[EigResult]:
    """Ito-Murota on the assembled block pencil; pairs filtered by ``config.tol``.

    With ``config.balance`` the function rows of A are divided by
    ``nu = ||A||_F/||B||_F`` before solving and the eigenvalues multiplied
    by ``nu`` afterwards (see :func:`_balanced_rows`).  Residuals are always
    measured on the unbalanced, unscaled pencil.
    """
    cfg = problem.config
    A, B = assemble(problem)
    _, (MA, MB) = pencil_coords(A, B)
    nu = _balance(MA, MB, cfg)
    s = _column_scales(*_balanced_rows(MA, MB, problem.d, nu), cfg)
    W = np.diag(1.0 / s)
    if nu != 1.0:
        A = BlockQuasimatrix(A.top.scale(1.0 / nu), A.bottom)
        B = BlockQuasimatrix(B.top, nu * B.bottom)
    out = itomurota_block(A @ W, B @ W)
    return _results(problem, MA, MB, _rescale(out.lambdas, nu), out.X / s[:, None])


def lseig_bc(problem: EigProblem) -> list[EigResult]:
    """LSeig with boundary rows imposed exactly through the projector blkdiag(U_1, I_d).

    ``U_1`` holds the leading ``n - d`` left singular functions of the
    function part ``[A_top B_top]``.  Pairs violating the boundary rows by
    more than a small relative tolerance are dropped.
    """
    cfg = problem.config
    n, d = problem.n, problem.d
    if d < 1:
        raise ShapeError("lseig_bc needs at least one boundary condition")
    if d >= n:
        raise ShapeError(f"lseig_bc needs more basis columns ({n}) than conditions ({d})")
    A, B = assemble(problem)
    frame, (MA, MB) = pencil_coords(A, B, min_rank=2 * n)
    nu = _balance(MA, MB, cfg)
    MAb, MBb = _balanced_rows(MA, MB, d, nu)
    s = _column_scales(MAb, MBb, cfg)
    MAs, MBs = MAb / s, MBb / s
    m = MA.shape[0] - d
    _, R = qr_coords(np.hstack([MAs[:m], MBs[:m]]), frame)
    _, sig, Vh = np.linalg.svd(R)
    V = Vh.conj().T
    k = n - d
    S = np.vstack([sig[:k, None] * V[:n, :k].conj().T, MAs[m:]])
    T = np.vstack([sig[:k, None] * V[n:, :k].conj().T, MBs[m:]])
    lam, X = dense_gep(S, T)
    lam = _rescale(lam, nu)
    X = normalize_columns(X / s[:, None])

    BA, BB = bc_matrices(problem.bcs, problem.groups)
    rtol = BC_CHECK_RTOL_LAMBDA if any(bc.depends_on_lambda for bc in problem.bcs) else BC_CHECK_RTOL
    nA, nB = np.linalg.norm(BA, 2), np.linalg.norm(BB, 2)
    ok = []
    for j in range(n):
        if not np.isfinite(lam[j]):
            ok.append(False)
            continue
        r = np.linalg.norm((BA - lam[j] * BB) @ X[:, j])
        ok.append(r <= rtol * max(nA + abs(lam[j]) * nB, 1.0))
    return _results(problem, MA, MB, lam, X, ok)
