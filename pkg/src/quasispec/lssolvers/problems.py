"""Ready-made problems: the classical test pencils and ODE eigenproblems."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..funcore import ChebFun, chebpoly, from_callable, from_coeffs, identity, legpoly, piecewise
from ..quasimatrix import Quasimatrix
from .krylov import chebyshev_basis, piecewise_chebyshev_basis
from .operators import (
    BasisGroup,
    BCTerm,
    BoundaryFunctional,
    EigProblem,
    OperatorExpr,
    SolverConfig,
    continuity_rows,
    dirichlet,
)
from .ultraspherical import UltrasphericalSolver

__all__ = [
    "CHEB_LEGENDRE_EIGENVALUES",
    "LAMBDA_BC_EXACT",
    "OdeSetup",
    "abs_x",
    "advdiff_direct",
    "advdiff_exact",
    "airy_setup",
    "cheb_legendre_pencil",
    "integral_reform_advdiff",
    "lambda_bc_problem",
    "orr_sommerfeld_problems",
    "pilot_setup",
    "schrodinger_problem",
    "schrodinger_ground_state",
    "sturm_liouville_exact",
    "sturm_liouville_problem",
]

D, I, C = OperatorExpr.d, OperatorExpr.identity, OperatorExpr.cumsum

CHEB_LEGENDRE_EIGENVALUES = (1.0, 1.0, 4 / 3, 8 / 5, 64 / 35, 128 / 63)
# reference values to 19 digits for -u'' = lambda u on [0, 1] with
# -u(0) = (lambda + d) u'(0), u(1) = lambda u'(1), d = -4 pi^2
LAMBDA_BC_EXACT = (9.730886578213082033, 88.76331625258976337, 157.88411043863472059)


@dataclass(frozen=True)
class OdeSetup:
    """An operator with boundary conditions on a domain."""

    op: OperatorExpr
    bcs: tuple
    domain: tuple


def abs_x(domain=(-1.0, 1.0)) -> ChebFun:
    """``|x|`` with a breakpoint at 0."""
    return piecewise(domain, [0.0], [lambda t: -t, lambda t: t])


def cheb_legendre_pencil(n: int = 6) -> tuple[Quasimatrix, Quasimatrix]:
    """``A = [T_0 .. T_{n-1}]``, ``B = [P_0 .. P_{n-1}]`` on [-1, 1]."""
    return (
        Quasimatrix([chebpoly(k) for k in range(n)]),
        Quasimatrix([legpoly(k) for k in range(n)]),
    )


# -- Krylov problems --------------------------------------------------------

def pilot_setup() -> tuple[OdeSetup, OdeSetup, ChebFun]:
    """``u'' + |x| u' = e^x`` and its neighbour with ``+u``, both with u(+-1) = 0."""
    dom = (-1.0, 1.0)
    bcs = (dirichlet(-1.0), dirichlet(1.0))
    L1 = D(2) + D(1, abs_x(dom))
    L2 = L1 + I()
    f = from_callable(np.exp, dom)
    return OdeSetup(L1, bcs, dom), OdeSetup(L2, bcs, dom), f


def airy_setup(eps: float = 1e-8) -> tuple[OdeSetup, ChebFun, UltrasphericalSolver]:
    """``eps u'' + x u = lambda u`` with u(+-1) = 0.

    Also returns the starting function ``(x - 1)(x + 1)`` and a banded
    inner solver for ``L^{-1}``.
    """
    dom = (-1.0, 1.0)
    op = D(2, eps) + I(identity(dom))
    bcs = (dirichlet(-1.0), dirichlet(1.0))
    u0 = from_coeffs([-0.5, 0.0, 0.5])  # x^2 - 1 = (T_2 - T_0) / 2
    return OdeSetup(op, bcs, dom), u0, UltrasphericalSolver(op, dom, bcs, tol=1e-15)


# -- eigenproblems ------------------------------------------------------------

def schrodinger_problem(h: float = 0.1, n: int = 40, basis: str = "piecewise", tol: float = 1.0) -> EigProblem:
    """``-h^2 u'' + |x| u = lambda u`` on [-3, 3], u(+-3) = 0.

    ``basis="piecewise"`` uses n/2 Chebyshev polynomials on each of [-3, 0]
    and [0, 3] plus continuity of u, u', u'' at 0; ``basis="global"`` uses
    ``T_0 .. T_{n-1}`` on [-3, 3].
    """
    dom = (-3.0, 3.0)
    op = D(2, -h * h) + I(abs_x(dom))
    bcs = [dirichlet(-3.0), dirichlet(3.0)]
    if basis == "piecewise":
        if n % 2:
            raise ValueError("the piecewise basis needs an even n")
        Q = piecewise_chebyshev_basis(dom, [0.0], n // 2)
        bcs += continuity_rows(0.0, [0, 1, 2])
    elif basis == "global":
        Q = chebyshev_basis(n, dom)
    else:
        raise ValueError(f"unknown basis {basis!r}; use 'piecewise' or 'global'")
    return EigProblem([BasisGroup(Q, op, name=basis)], bcs, SolverConfig(tol=tol), name=f"schrodinger-{basis}")


def schrodinger_ground_state(h: float = 0.1) -> float:
    """Ground-state energy on the whole line, ``h^(2/3) |a'_1|``.

    The even ground state is ``Ai((x - lambda)/h^(2/3))`` for x > 0 with
    ``u'(0) = 0``; truncating to [-3, 3] changes it by far less than 1e-12.
    """
    from scipy.special import ai_zeros

    return h ** (2 / 3) * abs(float(ai_zeros(1)[1][0]))


def sturm_liouville_problem(n: int = 100, tol: float = 1e-10, **config) -> EigProblem:
    """``(e^{3x} u')' + 2 e^{3x} u + lambda e^{3x} u = 0`` on [0, 1], Dirichlet."""
    dom = (0.0, 1.0)
    e3 = from_callable(lambda x: np.exp(3 * x), dom)
    LA = (D(2) + D(1, 3.0) + I(2.0)) * e3 * -1.0
    LB = I(e3)
    return EigProblem(
        [BasisGroup(chebyshev_basis(n, dom), LA, LB)],
        [dirichlet(0.0), dirichlet(1.0)],
        SolverConfig(tol=tol, **config),
        name="sturm-liouville",
    )


def sturm_liouville_exact(k) -> np.ndarray:
    """With u = e^{-3x/2} w the problem becomes -w'' = (lambda - 1/4) w."""
    k = np.asarray(k, dtype=float)
    return k * k * math.pi**2 + 0.25


def lambda_bc_problem(n: int = 100, d: float = -4 * math.pi**2, tol: float = 1e-9, **config) -> EigProblem:
    """``-u'' = lambda u`` on [0, 1] with ``-u(0) = (lambda + d) u'(0)`` and ``u(1) = lambda u'(1)``."""
    bcs = [
        BoundaryFunctional([BCTerm(0.0, 0, -1.0), BCTerm(0.0, 1, -d)], [BCTerm(0.0, 1, 1.0)]),
        BoundaryFunctional([BCTerm(1.0, 0, 1.0)], [BCTerm(1.0, 1, 1.0)]),
    ]
    return EigProblem(
        [BasisGroup(chebyshev_basis(n, (0.0, 1.0)), D(2, -1.0), I())],
        bcs,
        SolverConfig(tol=tol, **config),
        name="lambda-bc",
    )


def _os_operators(R: float):
    w = from_coeffs([0.5, 0.0, -0.5])  # 1 - x^2
    LA = (D(4) - D(2, 2.0) + I()) * (1 / R) - I(2j) - (D(2) - I()) * (1j * w)
    LB = D(2) - I()
    IA = I(1 / R) - C(2) * (2 / R) - C(2) * (1j * w) + C(4) * (1 / R - 2j) + C(4) * (1j * w)
    IB = C(2) - C(4)
    return LA, LB, IA, IB


def orr_sommerfeld_problems(R: float = 5772.0, n: int = 100, tol: float = 1e-2, **config) -> dict[str, EigProblem]:
    """Plane Poiseuille Orr-Sommerfeld pencils for unit wavenumber.

    ``direct``: Chebyshev basis with four bordered boundary rows.
    ``recombined``: columns ``(1 - x^2)^2 T_k`` that satisfy the boundary
    conditions, so no rows are added.
    ``integral``: unknown ``v = u''''`` over ``T_0 .. T_{n-1}`` (so
    ``u = C^4 v + p``) plus the cubic ``p`` over ``T_0 .. T_3``.
    """
    if n < 8:
        raise ValueError("n must be at least 8")
    LA, LB, IA, IB = _os_operators(R)
    cfg = SolverConfig(tol=tol, **config)
    bcs = [BoundaryFunctional([BCTerm(x, o, 1.0)]) for x in (-1.0, 1.0) for o in (0, 1)]
    Q = chebyshev_basis(n)
    bump = from_coeffs([1.0, 0.0, -1.0])  # 2(1 - x^2) = T_0 - T_2
    bump2 = (bump * bump).scale(0.25)
    rb = Quasimatrix([bump2 * chebpoly(k) for k in range(n)])
    return {
        "direct": EigProblem([BasisGroup(Q, LA, LB)], bcs, cfg, name="orr-sommerfeld-direct"),
        "recombined": EigProblem([BasisGroup(rb, LA, LB)], [], cfg, name="orr-sommerfeld-recombined"),
        "integral": EigProblem(
            [BasisGroup(Q, IA, IB, C(4), name="v"), BasisGroup(chebyshev_basis(4), LA, LB, name="p")],
            bcs,
            cfg,
            name="orr-sommerfeld-integral",
        ),
    }


def integral_reform_advdiff(domain=(-1.0, 1.0), n: int = 40, tol: float = 1e-8, **config) -> EigProblem:
    """``u'' + u' = lambda u``, u(a) = u(b) = 0, with ``v = u''`` as the unknown.

    ``u = alpha x + beta + C^2 v``.  The auxiliary columns ``[x, 1]`` carry
    ``alpha`` and ``beta``; under the operator they become ``[1, 0]`` on the
    left and stay ``[x, 1]`` on the right.
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    a, b = float(domain[0]), float(domain[1])
    Q = chebyshev_basis(n, (a, b))
    aux = Quasimatrix([identity((a, b)), from_coeffs([1.0], (a, b))])
    groups = [
        BasisGroup(Q, I() + C(1), C(2), C(2), name="v"),
        BasisGroup(aux, D(2) + D(1), I(), name="affine"),
    ]
    return EigProblem(groups, [dirichlet(a), dirichlet(b)], SolverConfig(tol=tol, **config), name="advdiff-integral")


def advdiff_direct(domain=(-1.0, 1.0), n: int = 40, tol: float = 1e-8, **config) -> EigProblem:
    """The same advection-diffusion problem over a plain Chebyshev basis."""
    a, b = float(domain[0]), float(domain[1])
    return EigProblem(
        [BasisGroup(chebyshev_basis(n, (a, b)), D(2) + D(1), I())],
        [dirichlet(a), dirichlet(b)],
        SolverConfig(tol=tol, **config),
        name="advdiff-direct",
    )


def advdiff_exact(k, domain=(-1.0, 1.0)) -> np.ndarray:
    """With u = e^{-x/2} w: w'' = (lambda + 1/4) w, so lambda_k = -1/4 - (k pi / L)^2."""
    L = float(domain[1]) - float(domain[0])
    k = np.asarray(k, dtype=float)
    return -0.25 - (k * math.pi / L) ** 2
