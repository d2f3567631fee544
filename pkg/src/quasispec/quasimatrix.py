"""Quasimatrices: ordered columns of ChebFuns with QR and SVD.

All factorizations run in *L2 coordinates*: on every piece of the common
breakpoint set, a column of degree < M is sampled at 2M-1 Clenshaw-Curtis
points and scaled by the square roots of the quadrature weights.  The
quadrature is exact for products of two such polynomials, so the map from
functions to coordinate vectors is an isometry and matrix QR in coordinates
is quasimatrix QR.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import DomainError, ShapeError
from .funcore import (
    ChebFun,
    Domain,
    _check_same_domain,
    clenshaw_curtis_weights,
    coeffs2vals,
    constant,
    merge_breaks,
    vals2coeffs,
)

__all__ = ["L2Frame", "Quasimatrix", "SvdFactors", "hcat_svd"]

_DEFICIENT_RTOL = 1e-14


class L2Frame:
    """Isometric coordinates for piecewise polynomials of bounded degree."""

    def __init__(self, breaks: np.ndarray, sizes: Sequence[int]):
        self.breaks = np.asarray(breaks, dtype=float)
        self.sizes = [max(1, int(s)) for s in sizes]
        self.npts = [2 * s - 1 for s in self.sizes]
        self.sqrtw = []
        for p, npts in enumerate(self.npts):
            half = 0.5 * (self.breaks[p + 1] - self.breaks[p])
            self.sqrtw.append(np.sqrt(clenshaw_curtis_weights(npts) * half))
        self.offsets = np.concatenate([[0], np.cumsum(self.npts)]).astype(int)

    @property
    def dim(self) -> int:
        """Number of coordinates."""
        return int(self.offsets[-1])

    @property
    def rank(self) -> int:
        """Dimension of the represented function space."""
        return int(sum(self.sizes))

    @classmethod
    def for_functions(cls, funs: Iterable[ChebFun], min_rank: int = 0) -> "L2Frame":
        funs = list(funs)
        brk = merge_breaks(*[f.breaks for f in funs])
        npieces = brk.size - 1
        sizes = np.ones(npieces, dtype=int)
        for f in funs:
            fb = f.breaks
            for p in range(npieces):
                mid = 0.5 * (brk[p] + brk[p + 1])
                q = int(np.searchsorted(fb[1:-1], mid, side="right"))
                sizes[p] = max(sizes[p], f.coeffs[q].size)
        while sizes.sum() < min_rank:
            sizes[np.argmin(sizes)] += 1
        return cls(brk, sizes)

    def coords(self, funs: Sequence[ChebFun]) -> np.ndarray:
        """Coordinate matrix, one column per function."""
        out = np.empty((self.dim, len(funs)), dtype=np.complex128)
        for p in range(len(self.sizes)):
            dom = Domain(self.breaks[p], self.breaks[p + 1])
            sl = slice(self.offsets[p], self.offsets[p + 1])
            for j, f in enumerate(funs):
                out[sl, j] = f.values_on(dom, self.npts[p]) * self.sqrtw[p]
        return out

    def to_chebfuns(self, C: np.ndarray) -> list[ChebFun]:
        """Functions represented by the columns of a coordinate matrix."""
        C = np.asarray(C, dtype=np.complex128)
        if C.ndim == 1:
            C = C[:, None]
        per_piece = []
        for p, size in enumerate(self.sizes):
            sl = slice(self.offsets[p], self.offsets[p + 1])
            vals = C[sl] / self.sqrtw[p][:, None]
            per_piece.append(vals2coeffs(vals)[:size])
        return [
            ChebFun(self.breaks, [pp[:, j] for pp in per_piece]) for j in range(C.shape[1])
        ]

    def candidates(self) -> np.ndarray:
        """Coordinates of piecewise T_k, ordered by increasing degree."""
        cols = []
        maxsize = max(self.sizes)
        for k in range(maxsize):
            for p, size in enumerate(self.sizes):
                if k >= size:
                    continue
                v = np.zeros(self.dim, dtype=np.complex128)
                c = np.zeros(self.npts[p], dtype=np.complex128)
                c[k] = 1.0
                v[self.offsets[p] : self.offsets[p + 1]] = coeffs2vals(c) * self.sqrtw[p]
                cols.append(v)
        return np.array(cols).T


def _fill_deficient(Q: np.ndarray, deficient: np.ndarray, frame: L2Frame) -> np.ndarray:
    """Replace flagged columns by unit vectors orthogonal to all others.

    Low-degree candidates are tried first; if they run out before every
    flagged column is filled, the rest come from an SVD of the candidates
    projected onto the orthogonal complement.
    """
    if not deficient.any():
        return Q
    Q = Q.copy()
    cand = frame.candidates()
    used = [j for j in range(Q.shape[1]) if not deficient[j]]
    todo = list(np.nonzero(deficient)[0])
    k = 0
    while todo and k < cand.shape[1]:
        v = cand[:, k].copy()
        k += 1
        n0 = np.linalg.norm(v)
        B = Q[:, used]
        for _ in range(2):
            v -= B @ (B.conj().T @ v)
        nv = np.linalg.norm(v)
        if nv > 0.5 * n0:
            j = todo.pop(0)
            Q[:, j] = v / nv
            used.append(j)
    if todo:
        P = cand.copy()
        B = Q[:, used]
        for _ in range(2):
            P -= B @ (B.conj().T @ P)
        U, s, _ = np.linalg.svd(P, full_matrices=False)
        if s.size < len(todo) or s[len(todo) - 1] <= 1e-8 * max(s[0], 1e-300):
            raise ShapeError("L2 frame too small for rank-deficient completion")
        Q[:, todo] = U[:, : len(todo)]
    return Q


def qr_coords(V: np.ndarray, frame: L2Frame):
    """MGS2 QR of a coordinate matrix with rank-deficient completion."""
    Qc, R, deficient = _kernels.mgs2(V, _DEFICIENT_RTOL)
    Qc = _fill_deficient(Qc, deficient, frame)
    return Qc, R


class Quasimatrix:
    """An infinity-by-n quasimatrix whose columns share one domain."""

    def __init__(self, columns: Sequence[ChebFun]):
        columns = tuple(columns)
        if not columns:
            raise ShapeError("a quasimatrix needs at least one column")
        dom = columns[0].domain
        for c in columns[1:]:
            _check_same_domain(columns[0], c)
        self.columns = columns
        self.domain: Domain = dom
        self._pieces = None

    # -- basic protocol ----------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.columns)

    def __len__(self) -> int:
        return self.n

    def __iter__(self):
        return iter(self.columns)

    def __getitem__(self, idx):
        if isinstance(idx, (int, np.integer)):
            return self.columns[idx]
        if isinstance(idx, slice):
            return Quasimatrix(self.columns[idx])
        return Quasimatrix([self.columns[i] for i in idx])

    def __repr__(self) -> str:
        return f"Quasimatrix(n={self.n}, domain=[{self.domain.a:g}, {self.domain.b:g}])"

    def hcat(self, *others: "Quasimatrix") -> "Quasimatrix":
        cols = list(self.columns)
        for o in others:
            cols.extend(o.columns)
        return Quasimatrix(cols)

    # -- coefficient-space products ---------------------------------------
    def _piece_matrices(self):
        if self._pieces is None:
            brk = merge_breaks(*[c.breaks for c in self.columns])
            refined = [c.refine(brk) for c in self.columns]
            mats = []
            for p in range(brk.size - 1):
                m = max(r.coeffs[p].size for r in refined)
                M = np.zeros((m, self.n), dtype=np.complex128)
                for j, r in enumerate(refined):
                    M[: r.coeffs[p].size, j] = r.coeffs[p]
                mats.append(M)
            self._pieces = (brk, mats)
        return self._pieces

    def apply(self, c) -> ChebFun:
        """The linear combination sum_i c_i q_i."""
        c = np.asarray(c, dtype=np.complex128).ravel()
        if c.size != self.n:
            raise ShapeError(f"coefficient vector has length {c.size}, expected {self.n}")
        brk, mats = self._piece_matrices()
        return ChebFun(brk, [M @ c for M in mats])

    def __matmul__(self, W) -> "Quasimatrix":
        W = np.asarray(W, dtype=np.complex128)
        if W.ndim == 1:
            return Quasimatrix([self.apply(W)])
        if W.shape[0] != self.n:
            raise ShapeError(f"cannot multiply {self.n}-column quasimatrix by {W.shape}")
        brk, mats = self._piece_matrices()
        prods = [M @ W for M in mats]
        return Quasimatrix([ChebFun(brk, [P[:, j] for P in prods]) for j in range(W.shape[1])])

    def scale(self, alpha) -> "Quasimatrix":
        return Quasimatrix([c.scale(alpha) for c in self.columns])

    def __add__(self, other: "Quasimatrix") -> "Quasimatrix":
        if other.n != self.n:
            raise ShapeError("width mismatch")
        return Quasimatrix([a + b for a, b in zip(self.columns, other.columns)])

    def __sub__(self, other: "Quasimatrix") -> "Quasimatrix":
        if other.n != self.n:
            raise ShapeError("width mismatch")
        return Quasimatrix([a - b for a, b in zip(self.columns, other.columns)])

    # -- inner products ------------------------------------------------------
    def frame(self, *extra: ChebFun, min_rank: int = 0) -> L2Frame:
        return L2Frame.for_functions(list(self.columns) + list(extra), min_rank=min_rank)

    def adjoint_apply(self, f: ChebFun) -> np.ndarray:
        """Vector of inner products <q_i, f>."""
        _check_same_domain(self.columns[0], f)
        fr = self.frame(f)
        V = fr.coords(list(self.columns) + [f])
        return V[:, :-1].conj().T @ V[:, -1]

    def adjoint_matmul(self, other: "Quasimatrix") -> np.ndarray:
        """The n-by-m matrix of inner products <q_i, other_j>."""
        if other.domain != self.domain:
            _check_same_domain(self.columns[0], other.columns[0])
        fr = L2Frame.for_functions(list(self.columns) + list(other.columns))
        V = fr.coords(list(self.columns) + list(other.columns))
        return V[:, : self.n].conj().T @ V[:, self.n :]

    def gram(self) -> np.ndarray:
        V = self.frame().coords(self.columns)
        return V.conj().T @ V

    # -- factorizations ------------------------------------------------------
    def qr_coords(self):
        """(frame, Q coordinates, R) without materializing Q as functions."""
        fr = self.frame(min_rank=self.n)
        V = fr.coords(self.columns)
        Qc, R = qr_coords(V, fr)
        return fr, Qc, R

    def qr(self):
        """Thin QR: returns (orthonormal Quasimatrix, upper-triangular R)."""
        fr, Qc, R = self.qr_coords()
        return Quasimatrix(fr.to_chebfuns(Qc)), R

    def rfactor(self) -> np.ndarray:
        return self.qr_coords()[2]

    def svd(self) -> "SvdFactors":
        fr, Qc, R = self.qr_coords()
        UR, s, Vh = np.linalg.svd(R)
        left = Quasimatrix(fr.to_chebfuns(Qc @ UR))
        return SvdFactors(left, s, Vh.conj().T)

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.rfactor(), compute_uv=False)

    def norm2(self) -> float:
        return float(self.singular_values()[0])

    def normF(self) -> float:
        return float(np.linalg.norm(self.rfactor()))


@dataclass(frozen=True)
class SvdFactors:
    """``M = left @ diag(sigmas) @ right^*`` with orthonormal ``left``."""

    left: object
    sigmas: np.ndarray
    right: np.ndarray

    def partition(self, n: int):
        """The n-by-n blocks (V11, V12, V21, V22) of ``right``."""
        V = self.right
        if V.shape != (2 * n, 2 * n):
            raise ShapeError(f"right factor has shape {V.shape}, expected {(2 * n, 2 * n)}")
        return V[:n, :n], V[:n, n:], V[n:, :n], V[n:, n:]


def hcat_svd(A: Quasimatrix, B: Quasimatrix) -> SvdFactors:
    """SVD of the infinity-by-2n concatenation [A B]."""
    if A.n != B.n:
        raise ShapeError(f"widths differ: {A.n} vs {B.n}")
    if A.domain != B.domain:
        raise DomainError("quasimatrices live on different domains")
    return A.hcat(B).svd()


def zeros(domain, n: int) -> Quasimatrix:
    return Quasimatrix([constant(0.0, domain) for _ in range(n)])
