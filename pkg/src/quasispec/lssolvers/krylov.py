"""Inverse-iteration Krylov bases and the inner ODE solvers that feed them."""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from ..errors import UnresolvedFunctionError
from ..funcore import ChebFun, as_domain, chebpoly, norm_l2
from ..quasimatrix import Quasimatrix
from .operators import BoundaryFunctional, OperatorExpr, SolverConfig, continuity_rows
from .solvers import lsode

__all__ = [
    "AdaptiveLsodeSolver",
    "BREAKDOWN_RTOL",
    "chebyshev_basis",
    "krylov_subspace",
    "piecewise_chebyshev_basis",
]

BREAKDOWN_RTOL = 1e-13


def chebyshev_basis(n: int, domain=(-1.0, 1.0)) -> Quasimatrix:
    """``[T_0, ..., T_{n-1}]`` mapped to ``domain``."""
    return Quasimatrix([chebpoly(k, domain) for k in range(n)])


def piecewise_chebyshev_basis(domain, breakpoints: Sequence[float], n_per_piece: int) -> Quasimatrix:
    """Locally supported Chebyshev polynomials, ``n_per_piece`` on each subinterval.

    Columns are ordered by degree first, then by piece, so the leading
    columns are the low-degree ones on every piece.
    """
    dom = as_domain(domain)
    breaks = np.concatenate([[dom.a], np.asarray(breakpoints, dtype=float), [dom.b]])
    npieces = breaks.size - 1
    cols = []
    for k in range(n_per_piece):
        e = np.zeros(k + 1, dtype=np.complex128)
        e[k] = 1.0
        for p in range(npieces):
            coeffs = [e if q == p else np.zeros(1, dtype=np.complex128) for q in range(npieces)]
            cols.append(ChebFun(breaks, coeffs))
    return Quasimatrix(cols)


class AdaptiveLsodeSolver:
    """``f -> L^{-1} f`` by lsode over piecewise Chebyshev bases of growing degree.

    Pieces follow the breakpoints of the operator coefficients, joined by
    continuity rows for derivatives below the operator order.  The degree
    per piece doubles from ``nmin`` until the lsode residual is at most
    ``rtol * ||f||`` or ``nmax`` is exceeded.
    """

    def __init__(
        self,
        op: OperatorExpr,
        domain,
        bcs: Sequence[BoundaryFunctional],
        rtol: float = 1e-10,
        nmin: int = 16,
        nmax: int = 512,
        breakpoints: Sequence[float] | None = None,
    ):
        self.op = op
        self.domain = as_domain(domain)
        self.bcs = list(bcs)
        self.rtol, self.nmin, self.nmax = rtol, nmin, nmax
        if breakpoints is None:
            bp = op.breakpoints()
            breakpoints = [b for b in bp if self.domain.a < b < self.domain.b]
        self.breakpoints = list(breakpoints)
        orders = list(range(max(op.max_derivative, 1)))
        self.rows = self.bcs + [r for b in self.breakpoints for r in continuity_rows(b, orders)]
        self.last_residual = math.nan
        self.last_degree = 0

    def __call__(self, f: ChebFun) -> ChebFun:
        target = self.rtol * max(norm_l2(f), np.finfo(float).tiny)
        n = self.nmin
        while True:
            basis = piecewise_chebyshev_basis(self.domain, self.breakpoints, n)
            u, res = lsode(self.op, f, basis, self.rows, SolverConfig())
            if res <= target:
                self.last_residual, self.last_degree = res, n
                return u.simplify()
            if 2 * n > self.nmax:
                raise UnresolvedFunctionError(
                    f"inner solve residual {res:.2e} above {target:.2e} at degree {n}"
                )
            n *= 2


def _orthogonalize(w: ChebFun, Q: list[ChebFun]) -> ChebFun:
    for _ in range(2):
        h = Quasimatrix(Q).adjoint_apply(w)
        w = w - Quasimatrix(Q).apply(h)
    return w


def krylov_subspace(
    inner_solve: Callable[[ChebFun], ChebFun],
    u0: ChebFun,
    m: int,
    start: str = "u0",
    breakdown_tol: float = BREAKDOWN_RTOL,
) -> Quasimatrix:
    """Orthonormal basis of ``span(u0, L^{-1} u0, ..., L^{-(m-1)} u0)``.

    ``inner_solve`` applies ``L^{-1}``.  With ``start="inverse"`` the space
    begins at ``L^{-1} u0`` instead.  Each new direction is orthogonalized
    twice against the previous ones (classical Gram-Schmidt with
    reorthogonalization).  If its norm drops below ``breakdown_tol`` times
    the norm before orthogonalization, the basis built so far is returned.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if start not in ("u0", "inverse"):
        raise ValueError("start must be 'u0' or 'inverse'")
    nrm = norm_l2(u0)
    if nrm == 0:
        raise ValueError("u0 must be nonzero")
    q = u0 if start == "u0" else inner_solve(u0)
    nrm = norm_l2(q)
    if nrm == 0:
        raise ValueError("starting vector vanished")
    Q = [q / nrm]
    while len(Q) < m:
        w = inner_solve(Q[-1])
        before = norm_l2(w)
        w = _orthogonalize(w, Q)
        after = norm_l2(w)
        if before == 0 or after < breakdown_tol * before:
            break
        Q.append((w / after).simplify())
    return Quasimatrix(Q)
