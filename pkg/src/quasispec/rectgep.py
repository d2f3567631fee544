"""Rectangular generalized eigenproblems A x = lambda B x in the total-least-squares sense.

The Ito-Murota reduction: take the SVD of ``[A B]``, keep the leading ``n``
left singular vectors ``U_1`` and solve the square pencil
``(U_1^* A) X = (U_1^* B) X Lambda``.  The same code handles dense matrices
and (infinity+d)-by-n block quasimatrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .blockop import BlockQuasimatrix, split_left
from .errors import IllPosedTLSError, ShapeError, SolverError
from .quasimatrix import Quasimatrix

__all__ = [
    "RectEigOutput",
    "dense_gep",
    "itomurota_discrete",
    "itomurota_block",
    "min_perturbation",
    "normalize_columns",
    "sort_order",
]

EIGVEC_COND_WARN = 1e8
GAP_RTOL = 1e-12


@dataclass
class RectEigOutput:
    lambdas: np.ndarray
    X: np.ndarray
    pert_norm: float
    sigmas: np.ndarray
    warnings: list[str] = field(default_factory=list)
    U1: object = None


def sort_order(lambdas: np.ndarray) -> np.ndarray:
    """Indices ordering finite values by descending real part, then imaginary part.

    Infinite eigenvalues go last.
    """
    lam = np.asarray(lambdas, dtype=np.complex128)
    finite = np.isfinite(lam)
    # real parts equal to ~12 digits count as ties (conjugate pairs)
    scale = float(np.max(np.abs(lam[finite]), initial=0.0)) or 1.0
    re = np.where(finite, np.round(lam.real / scale, 12), -np.inf)
    im = np.where(finite, lam.imag, -np.inf)
    return np.lexsort((-im, -re, ~finite))


def normalize_columns(X: np.ndarray) -> np.ndarray:
    """Unit 2-norm columns; the first non-negligible entry is made real positive."""
    X = np.array(X, dtype=np.complex128, copy=True)
    for j in range(X.shape[1]):
        x = X[:, j]
        nrm = np.linalg.norm(x)
        if nrm == 0:
            continue
        x /= nrm
        k = int(np.argmax(np.abs(x) > 1e-10))
        x *= abs(x[k]) / x[k]
    return X


def dense_gep(S, T):
    """All eigenpairs of ``S x = lambda T x`` via QZ.

    Eigenvalues with a vanishing homogeneous denominator are returned as
    ``inf``.  Output is sorted (see :func:`sort_order`) and eigenvectors are
    normalized with :func:`normalize_columns`.
    """
    S = np.asarray(S, dtype=np.complex128)
    T = np.asarray(T, dtype=np.complex128)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape != T.shape:
        raise ShapeError(f"dense_gep needs two equal square matrices, got {S.shape} and {T.shape}")
    if not (np.all(np.isfinite(S)) and np.all(np.isfinite(T))):
        raise SolverError("pencil contains non-finite entries")
    try:
        w, X = scipy.linalg.eig(S, T, right=True, homogeneous_eigvals=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"QZ failed: {exc}") from exc
    alpha, beta = w
    infinite = np.abs(beta) <= 16 * np.finfo(float).eps * np.linalg.norm(T)
    infinite |= beta == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(infinite, complex(np.inf, 0.0), alpha / np.where(infinite, 1.0, beta))
    order = sort_order(lam)
    return lam[order], normalize_columns(X[:, order])


def _eigvec_warnings(X: np.ndarray) -> list[str]:
    if X.size == 0:
        return []
    with np.errstate(all="ignore"):
        c = np.linalg.cond(X)
    if not np.isfinite(c) or c > EIGVEC_COND_WARN:
        return [f"eigenvector matrix condition number {c:.3g} exceeds {EIGVEC_COND_WARN:.0e}; "
                "the projected pencil may be non-diagonalizable"]
    return []


def _full_svd(M: np.ndarray, k: int):
    """SVD with ``k`` singular values (zero padded) and a full right factor."""
    U, s, Vh = np.linalg.svd(M, full_matrices=True)
    sig = np.zeros(k)
    sig[: s.size] = s[:k]
    return U, sig, Vh.conj().T


def itomurota_discrete(A, B) -> RectEigOutput:
    A = np.atleast_2d(np.asarray(A, dtype=np.complex128))
    B = np.atleast_2d(np.asarray(B, dtype=np.complex128))
    if A.shape != B.shape:
        raise ShapeError(f"A is {A.shape} but B is {B.shape}")
    m, n = A.shape
    if m < n:
        raise ShapeError(f"need at least as many rows as columns, got {m}x{n}")
    U, sig, V = _full_svd(np.hstack([A, B]), 2 * n)
    V11, V21 = V[:n, :n], V[n:, :n]
    lam, X = dense_gep(V11.conj().T, V21.conj().T)
    pert = math.sqrt(float(np.sum(sig[n:] ** 2)))
    return RectEigOutput(lam, X, pert, sig, _eigvec_warnings(X), U[:, :n])


def _as_block(M) -> BlockQuasimatrix:
    if isinstance(M, BlockQuasimatrix):
        return M
    if isinstance(M, Quasimatrix):
        return BlockQuasimatrix(M)
    raise TypeError(f"expected a BlockQuasimatrix or Quasimatrix, got {type(M).__name__}")


def itomurota_block(A, B) -> RectEigOutput:
    """Ito-Murota for (infinity+d)-by-n pencils."""
    A, B = _as_block(A), _as_block(B)
    if A.n != B.n or A.d != B.d:
        raise ShapeError(f"pencil blocks differ: n={A.n},{B.n} d={A.d},{B.d}")
    n = A.n
    fac = A.hcat(B).svd()
    V = fac.right
    sig = fac.sigmas
    # U_1^* A = Sigma_1 V11^*, U_1^* B = Sigma_1 V21^*
    S = sig[:n, None] * V[:n, :n].conj().T
    T = sig[:n, None] * V[n:, :n].conj().T
    lam, X = dense_gep(S, T)
    pert = math.sqrt(float(np.sum(sig[n:] ** 2)))
    U1, _ = split_left(fac, n)
    return RectEigOutput(lam, X, pert, sig, _eigvec_warnings(X), U1)


def min_perturbation(A, B):
    """The unique smallest ``(A_hat, B_hat)`` whose pencil has n exact eigenpairs.

    With ``[B A] = U Sigma V^*`` partitioned into n-by-n blocks,
    ``A_hat = A - U_2 Sigma_2 V22^*`` and ``B_hat = B - U_2 Sigma_2 V12^*``.
    Requires ``sigma_n(B) > sigma_{n+1}([B A])``; otherwise the minimizer is
    not unique and :class:`IllPosedTLSError` is raised.

    Accepts dense matrices or block quasimatrices (returned in kind).
    """
    dense = isinstance(A, np.ndarray) or isinstance(B, np.ndarray)
    if dense:
        A = np.atleast_2d(np.asarray(A, dtype=np.complex128))
        B = np.atleast_2d(np.asarray(B, dtype=np.complex128))
        if A.shape != B.shape:
            raise ShapeError(f"A is {A.shape} but B is {B.shape}")
        m, n = A.shape
        U, sig, V = _full_svd(np.hstack([B, A]), 2 * n)
        sB = np.linalg.svd(B, compute_uv=False)
        sBn = sB[n - 1] if sB.size >= n else 0.0
    else:
        A, B = _as_block(A), _as_block(B)
        if A.n != B.n or A.d != B.d:
            raise ShapeError("pencil blocks differ in shape")
        n = A.n
        fac = B.hcat(A).svd()
        sig, V = fac.sigmas, fac.right
        sBn = B.singular_values()[n - 1]
    if sBn - sig[n] <= GAP_RTOL * max(sig[0], np.finfo(float).tiny):
        raise IllPosedTLSError(
            f"sigma_n(B) = {sBn:.3e} does not exceed sigma_(n+1)([B A]) = {sig[n]:.3e}; "
            "the total-least-squares perturbation is not unique"
        )
    V12, V22 = V[:n, n:], V[n:, n:]
    tail = sig[n:]
    if dense:
        k = min(n, U.shape[1] - n)
        U2S = np.zeros((A.shape[0], n), dtype=np.complex128)
        U2S[:, :k] = U[:, n : n + k] * tail[None, :k]
        return A - U2S @ V22.conj().T, B - U2S @ V12.conj().T
    _, U2 = split_left(fac, n)
    U2S = U2 @ np.diag(tail)
    return A - U2S @ V22.conj().T, B - U2S @ V12.conj().T
