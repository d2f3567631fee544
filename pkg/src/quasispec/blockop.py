"""(infinity+d)-by-n block objects: a quasimatrix stacked on a d-by-n matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .funcore import ChebFun, _check_same_domain, constant, inner, norm_l2
from .quasimatrix import Quasimatrix, SvdFactors, qr_coords, zeros

__all__ = ["FunVec", "BlockQuasimatrix", "block2x2_svd", "block_qr_coords", "matrix_qr", "split_left"]


@dataclass(frozen=True)
class FunVec:
    """A function together with a finite vector, e.g. ``[L u - f; B c - f_b]``."""

    fun: ChebFun
    tail: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "tail", np.asarray(self.tail, dtype=np.complex128).ravel())

    @property
    def d(self) -> int:
        return self.tail.size

    def inner(self, other: "FunVec") -> complex:
        return inner(self.fun, other.fun) + complex(np.vdot(self.tail, other.tail))

    def norm(self, alpha: float = 1.0, beta: float = 1.0) -> float:
        f = norm_l2(self.fun)
        t = float(np.linalg.norm(self.tail))
        return math.sqrt(alpha * f * f + beta * t * t)

    def __add__(self, other: "FunVec") -> "FunVec":
        return FunVec(self.fun + other.fun, self.tail + other.tail)

    def __sub__(self, other: "FunVec") -> "FunVec":
        return FunVec(self.fun - other.fun, self.tail - other.tail)

    def scale(self, alpha) -> "FunVec":
        return FunVec(self.fun.scale(alpha), complex(alpha) * self.tail)

    __mul__ = scale
    __rmul__ = scale


def matrix_qr(M: np.ndarray):
    """Thin Householder QR with a real nonnegative diagonal of R.

    Works for d = 0 rows (returns empty factors).
    """
    M = np.asarray(M, dtype=np.complex128)
    d, n = M.shape
    if d == 0:
        return np.zeros((0, 0), dtype=np.complex128), np.zeros((0, n), dtype=np.complex128)
    Q, R = np.linalg.qr(M, mode="reduced")
    diag = np.diagonal(R)
    ph = np.ones(diag.size, dtype=np.complex128)
    nz = np.abs(diag) > 0
    ph[nz] = diag[nz] / np.abs(diag[nz])
    return Q * ph, R * ph.conj()[:, None]


class BlockQuasimatrix:
    """``[top; bottom]`` with ``top`` infinity-by-n and ``bottom`` d-by-n."""

    def __init__(self, top: Quasimatrix, bottom=None):
        if bottom is None:
            bottom = np.zeros((0, top.n), dtype=np.complex128)
        bottom = np.atleast_2d(np.asarray(bottom, dtype=np.complex128))
        if bottom.size == 0:
            bottom = bottom.reshape(0, top.n)
        if bottom.shape[1] != top.n:
            raise ShapeError(f"bottom block has {bottom.shape[1]} columns, top has {top.n}")
        self.top = top
        self.bottom = bottom

    @property
    def n(self) -> int:
        return self.top.n

    @property
    def d(self) -> int:
        return self.bottom.shape[0]

    @property
    def domain(self):
        return self.top.domain

    def __repr__(self) -> str:
        return f"BlockQuasimatrix(n={self.n}, d={self.d})"

    def column(self, j: int) -> FunVec:
        return FunVec(self.top[j], self.bottom[:, j])

    # -- products ------------------------------------------------------------
    def apply(self, c) -> FunVec:
        c = np.asarray(c, dtype=np.complex128).ravel()
        if c.size != self.n:
            raise ShapeError(f"coefficient vector has length {c.size}, expected {self.n}")
        return FunVec(self.top.apply(c), self.bottom @ c)

    def adjoint_apply(self, w: FunVec) -> np.ndarray:
        if w.d != self.d:
            raise ShapeError(f"function-vector tail has length {w.d}, expected {self.d}")
        return self.top.adjoint_apply(w.fun) + self.bottom.conj().T @ w.tail

    def adjoint_matmul(self, other: "BlockQuasimatrix") -> np.ndarray:
        if other.d != self.d:
            raise ShapeError("block heights differ")
        return self.top.adjoint_matmul(other.top) + self.bottom.conj().T @ other.bottom

    def __matmul__(self, W) -> "BlockQuasimatrix":
        W = np.asarray(W, dtype=np.complex128)
        if W.ndim == 1:
            W = W[:, None]
        return BlockQuasimatrix(self.top @ W, self.bottom @ W)

    def hcat(self, other: "BlockQuasimatrix") -> "BlockQuasimatrix":
        if other.d != self.d:
            raise ShapeError("block heights differ")
        return BlockQuasimatrix(self.top.hcat(other.top), np.hstack([self.bottom, other.bottom]))

    def scale(self, alpha) -> "BlockQuasimatrix":
        return BlockQuasimatrix(self.top.scale(alpha), complex(alpha) * self.bottom)

    def __sub__(self, other: "BlockQuasimatrix") -> "BlockQuasimatrix":
        return BlockQuasimatrix(self.top - other.top, self.bottom - other.bottom)

    def __add__(self, other: "BlockQuasimatrix") -> "BlockQuasimatrix":
        return BlockQuasimatrix(self.top + other.top, self.bottom + other.bottom)

    def scale_rows(self, alpha: float, beta: float) -> "BlockQuasimatrix":
        """Scale the function rows by sqrt(alpha) and the matrix rows by sqrt(beta)."""
        if alpha <= 0 or beta <= 0:
            raise ValueError("row weights must be positive")
        if alpha == 1 and beta == 1:
            return self
        return BlockQuasimatrix(self.top.scale(math.sqrt(alpha)), math.sqrt(beta) * self.bottom)

    # -- factorizations ------------------------------------------------------
    def _stacked_r(self):
        frame, Qc, RA = self.top.qr_coords()
        QC, RC = matrix_qr(self.bottom)
        return frame, Qc, QC, np.vstack([RA, RC])

    def qr_coords(self, *extra: ChebFun):
        """Three-stage QR in L2 coordinates.

        Returns ``(frame, Qtop, Qbottom, R, Vextra)`` where ``Qtop`` holds the
        coordinates of the top block of Q and ``Vextra`` the coordinates of
        the ``extra`` functions in the same frame.
        """
        frame = self.top.frame(*extra, min_rank=self.n)
        V = frame.coords(list(self.top.columns) + list(extra))
        return (*block_qr_coords(V[:, : self.n], self.bottom, frame), V[:, self.n :])

    def qr(self):
        """QR via top QR, bottom QR and a thin QR of the stacked R factors."""
        frame, Qtop, Qbot, R, _ = self.qr_coords()
        return BlockQuasimatrix(Quasimatrix(frame.to_chebfuns(Qtop)), Qbot), R

    def svd(self) -> SvdFactors:
        frame, Qc, QC, S = self._stacked_r()
        UR, s, Vh = np.linalg.svd(S, full_matrices=False)
        n = self.n
        top = Quasimatrix(frame.to_chebfuns(Qc @ UR[:n]))
        bottom = QC @ UR[n:]
        return SvdFactors(BlockQuasimatrix(top, bottom), s, Vh.conj().T)

    def singular_values(self) -> np.ndarray:
        S = self._stacked_r()[3]
        return np.linalg.svd(S, compute_uv=False)

    def norm2(self) -> float:
        return float(self.singular_values()[0])

    def normF(self) -> float:
        return float(np.linalg.norm(self._stacked_r()[3]))

    def gram(self) -> np.ndarray:
        return self.top.gram() + self.bottom.conj().T @ self.bottom


def block_qr_coords(V: np.ndarray, bottom: np.ndarray, frame):
    """QR of ``[V; bottom]`` where ``V`` are L2 coordinates in ``frame``."""
    n = V.shape[1]
    Qc, RA = qr_coords(V, frame)
    QC, RC = matrix_qr(bottom)
    Qt, R = matrix_qr(np.vstack([RA, RC]))
    return frame, Qc @ Qt[:n], QC @ Qt[n:], R


def block2x2_svd(A: Quasimatrix, B: Quasimatrix, C, D) -> SvdFactors:
    """SVD of [[A, B], [C, D]], an (infinity+d)-by-2n object.

    ``left`` is the full (infinity+d)-by-2n left factor; use :func:`split_left`
    for the (U_1 | U_2) halves.
    """
    if A.n != B.n:
        raise ShapeError(f"widths differ: {A.n} vs {B.n}")
    _check_same_domain(A.columns[0], B.columns[0])
    C = np.atleast_2d(np.asarray(C, dtype=np.complex128))
    D = np.atleast_2d(np.asarray(D, dtype=np.complex128))
    if C.size == 0:
        C = C.reshape(0, A.n)
    if D.size == 0:
        D = D.reshape(0, A.n)
    if C.shape != D.shape or C.shape[1] != A.n:
        raise ShapeError(f"matrix blocks must both be d-by-{A.n}, got {C.shape} and {D.shape}")
    return BlockQuasimatrix(A.hcat(B), np.hstack([C, D])).svd()


def split_left(factors: SvdFactors, k: int):
    """Split a block left factor into its first k columns and the rest."""
    L: BlockQuasimatrix = factors.left
    idx1, idx2 = list(range(k)), list(range(k, L.n))
    U1 = BlockQuasimatrix(L.top[idx1], L.bottom[:, :k])
    U2 = BlockQuasimatrix(L.top[idx2], L.bottom[:, k:]) if idx2 else None
    return U1, U2


def zero_block(domain, n: int, d: int) -> BlockQuasimatrix:
    return BlockQuasimatrix(zeros(domain, n), np.zeros((d, n)))


def funvec_zero(domain, d: int) -> FunVec:
    return FunVec(constant(0.0, domain), np.zeros(d))
