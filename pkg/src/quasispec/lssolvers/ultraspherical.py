"""Banded ultraspherical spectral solver for ODEs with polynomial coefficients.

The solution is expanded in Chebyshev T; the k-th derivative maps T to the
ultraspherical basis C^(k), conversions S_l: C^(l) -> C^(l+1) lift every
term to C^(K) for an order-K operator, and multiplication by a polynomial
coefficient is banded in each C^(l) basis.  Boundary rows replace the last
rows of the system and the resulting almost-banded system is solved by
block elimination around a banded LU.  The degree doubles until the coefficient tail is
resolved.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.linalg.lapack
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import SingularSystemError, UnresolvedFunctionError
from ..funcore import ChebFun, Domain, _chop_length, default_tol
from .operators import BoundaryFunctional, OperatorExpr

__all__ = ["UltrasphericalSolver", "diffmat", "convertmat", "multmat", "cheb_derivative_values"]

MAX_N = 2**17
BACKWARD_RTOL = 1e-12


def diffmat(n: int, k: int) -> sp.csr_matrix:
    """D_k: T coefficients -> C^(k) coefficients of the k-th derivative on [-1, 1]."""
    if k == 0:
        return sp.identity(n, format="csr")
    j = np.arange(n - k)
    vals = 2.0 ** (k - 1) * math.factorial(k - 1) * (j + k)
    return sp.csr_matrix((vals, (j, j + k)), shape=(n, n))


def convertmat(n: int, lam: int) -> sp.csr_matrix:
    """S_lam: C^(lam) -> C^(lam+1); lam = 0 denotes the Chebyshev T basis."""
    j = np.arange(n)
    if lam == 0:
        d0 = np.full(n, 0.5)
        d0[0] = 1.0
        d2 = np.full(max(n - 2, 0), -0.5)
    else:
        d0 = lam / (lam + j)
        d2 = -lam / (lam + j[: max(n - 2, 0)] + 2.0)
    return sp.diags([d0, d2], [0, 2], shape=(n, n), format="csr")


def _xmat(n: int, lam: int) -> sp.csr_matrix:
    """Multiplication by t in the C^(lam) basis (T basis for lam = 0)."""
    j = np.arange(n)
    if lam == 0:
        sub = np.full(n - 1, 0.5)
        sub[0] = 1.0  # t T_0 = T_1
        sup = np.full(n - 1, 0.5)
    else:
        jj = j[1:]
        sub = jj / (2.0 * (jj - 1 + lam))  # (Xc)_j from c_{j-1}
        jj = j[:-1]
        sup = (jj + 2.0 * lam) / (2.0 * (jj + 1 + lam))  # (Xc)_j from c_{j+1}
    return sp.diags([sub, sup], [-1, 1], shape=(n, n), format="csr")


def multmat(n: int, a: np.ndarray, lam: int) -> sp.csr_matrix:
    """Multiplication by the Chebyshev series ``a`` in the C^(lam) basis."""
    a = np.asarray(a, dtype=np.complex128)
    m = a.size
    nw = n + m + 1
    X = _xmat(nw, lam)
    I = sp.identity(nw, format="csr", dtype=np.complex128)
    Tp, Tc = I, X
    M = a[0] * I
    if m > 1:
        M = M + a[1] * X
    for j in range(2, m):
        Tp, Tc = Tc, 2 * (X @ Tc) - Tp
        M = M + a[j] * Tc
    return sp.csr_matrix(M[:n, :n])


def cheb_derivative_values(n: int, t: float, k: int) -> np.ndarray:
    """Values of T_j^(k)(t) for j < n, t in [-1, 1]."""
    j = np.arange(n, dtype=float)
    if t in (1.0, -1.0):
        v = np.ones(n)
        for i in range(k):
            v *= (j * j - i * i) / (2 * i + 1)
        if t == -1.0:
            v *= (-1.0) ** (j + k)
        return v
    # differentiated three-term recurrence, T_{j+1}^(q) = 2t T_j^(q) + 2q T_j^(q-1) - T_{j-1}^(q)
    tab = np.zeros((k + 1, n))
    tab[0, 0] = 1.0
    if n > 1:
        tab[0, 1] = t
        if k >= 1:
            tab[1, 1] = 1.0
    for jj in range(1, n - 1):
        for q in range(k + 1):
            prev = tab[q - 1, jj] if q else 0.0
            tab[q, jj + 1] = 2 * t * tab[q, jj] + 2 * q * prev - tab[q, jj - 1]
    return tab[k]


class _AlmostBanded:
    """Square system ``[top; band]`` with ``d`` dense rows over a banded block.

    The unknowns split as ``c = [c_b; c_a]`` with ``c_b`` the first ``d``
    entries.  ``band[:, d:]`` is square and banded; it is factored once with
    LAPACK ``gbtrf`` and the dense rows are handled by a d-by-d Schur
    complement.  A final residual check falls back to a sparse LU.
    """

    def __init__(self, top: np.ndarray, band: sp.csr_matrix):
        self.top = top
        self.band = band.tocsr()
        self.norm_inf = max(
            float(np.abs(top).sum(axis=1).max(initial=0.0)),
            float(np.asarray(abs(self.band).sum(axis=1)).max(initial=0.0)),
        )
        d = top.shape[0]
        self.d = d
        n = band.shape[1]
        La = self.band[:, d:].tocoo()
        off = La.col - La.row
        self.kl = int(max(0, -off.min())) if off.size else 0
        self.ku = int(max(0, off.max())) if off.size else 0
        m = n - d
        ab = np.zeros((2 * self.kl + self.ku + 1, m), dtype=np.complex128)
        ab[self.kl + self.ku + La.row - La.col, La.col] = La.data
        self.lu, self.piv, info = scipy.linalg.lapack.zgbtrf(ab, self.kl, self.ku)
        self._fallback = None
        if info != 0:
            self._use_fallback()
            return
        Lb = self.band[:, :d].toarray()
        self.Z = self._band_solve(Lb)
        self.schur = self.top[:, :d] - self.top[:, d:] @ self.Z

    def _band_solve(self, r):
        x, info = scipy.linalg.lapack.zgbtrs(self.lu, self.kl, self.ku, r, self.piv)
        if info != 0:
            raise SingularSystemError("banded solve failed")
        return x

    def _use_fallback(self):
        A = sp.vstack([sp.csr_matrix(self.top), self.band], format="csc")
        try:
            self._fallback = spla.splu(A)
        except RuntimeError as exc:
            raise SingularSystemError(f"ultraspherical system is singular: {exc}") from exc

    def matvec(self, c):
        return np.concatenate([self.top @ c, self.band @ c])

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if self._fallback is None:
            d = self.d
            g, r = rhs[:d], rhs[d:]
            y = self._band_solve(r.astype(np.complex128))
            try:
                cb = np.linalg.solve(self.schur, g - self.top[:, d:] @ y) if d else np.zeros(0)
            except np.linalg.LinAlgError:
                cb = None
            if cb is not None:
                c = np.concatenate([cb, y - self.Z @ cb])
                # normwise backward error in the infinity norm
                r = np.abs(self.matvec(c) - rhs).max()
                scale = self.norm_inf * np.abs(c).max() + np.abs(rhs).max()
                if np.all(np.isfinite(c)) and r <= BACKWARD_RTOL * scale:
                    return c
            self._use_fallback()
        c = self._fallback.solve(rhs)
        if not np.all(np.isfinite(c)):
            raise SingularSystemError("ultraspherical system is singular")
        return c


class UltrasphericalSolver:
    """``u = L^{-1} f`` with boundary rows, for polynomial-coefficient ``L``.

    Callable on a right-hand side ChebFun; returns the solution ChebFun.
    """

    def __init__(
        self,
        op: OperatorExpr,
        domain,
        bcs: Sequence[BoundaryFunctional],
        tol: float | None = None,
        nmin: int = 32,
        nmax: int = MAX_N,
    ):
        self.domain = domain if isinstance(domain, Domain) else Domain(*domain)
        self.bcs = list(bcs)
        self.tol = default_tol() if tol is None else tol
        self.nmin, self.nmax = nmin, nmax
        scale = 2.0 / self.domain.length
        self.terms = []
        for t in op.terms:
            if t.action == "cumsum" and t.order:
                raise ValueError("the ultraspherical solver handles derivatives only")
            k = t.order if t.action == "d" else 0
            if isinstance(t.coeff, ChebFun):
                if t.coeff.npieces != 1:
                    raise ValueError("coefficients must be single-piece polynomials")
                a = np.asarray(t.coeff.coeffs[0])
            else:
                a = np.array([complex(t.coeff)])
            self.terms.append((k, a * scale**k))
        self.order = max(k for k, _ in self.terms)
        if any(bc.depends_on_lambda for bc in self.bcs):
            raise ValueError("boundary conditions must not depend on lambda")
        self._cache = {}

    def _lift(self, n: int, frm: int) -> sp.csr_matrix:
        M = sp.identity(n, format="csr")
        for lam in range(frm, self.order):
            M = convertmat(n, lam) @ M
        return M

    def _bcrows(self, n: int) -> np.ndarray:
        rows = np.zeros((len(self.bcs), n), dtype=np.complex128)
        scale = 2.0 / self.domain.length
        for i, bc in enumerate(self.bcs):
            for term in bc.terms:
                t = float(self.domain.to_local(term.point))
                t = 1.0 if abs(t - 1) < 1e-15 else (-1.0 if abs(t + 1) < 1e-15 else t)
                rows[i] += complex(term.weight) * scale**term.order * cheb_derivative_values(n, t, term.order)
        return rows

    def _matrix(self, n: int) -> "_AlmostBanded":
        if n not in self._cache:
            L = sp.csr_matrix((n, n), dtype=np.complex128)
            for k, a in self.terms:
                Mk = multmat(n, a, k) @ diffmat(n, k)
                L = L + self._lift(n, k) @ Mk
            d = len(self.bcs)
            self._cache[n] = (_AlmostBanded(self._bcrows(n), L[: n - d]), self._lift(n, 0))
        return self._cache[n]

    def __call__(self, f: ChebFun) -> ChebFun:
        if f.npieces != 1:
            raise ValueError("right-hand side must be a single-piece function")
        fc = np.asarray(f.coeffs[0], dtype=np.complex128)
        rhs_b = np.array([complex(bc.value) for bc in self.bcs], dtype=np.complex128)
        d = len(self.bcs)
        n = max(self.nmin, 2 ** int(math.ceil(math.log2(fc.size + self.order + 8))))
        while True:
            system, S = self._matrix(n)
            fp = np.zeros(n, dtype=np.complex128)
            m = min(n, fc.size)
            fp[:m] = fc[:m]
            rhs = np.concatenate([rhs_b, (S @ fp)[: n - d]])
            c = system.solve(rhs)
            keep = _chop_length(c, self.tol)
            if keep < n - max(8, n // 10) and fc.size <= n:
                return ChebFun([self.domain.a, self.domain.b], [c[:keep]])
            if n >= self.nmax:
                raise UnresolvedFunctionError(f"solution not resolved with {n} coefficients")
            n *= 2
