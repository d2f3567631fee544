"""Symbolic linear operators, boundary functionals and problem assembly."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from ..blockop import BlockQuasimatrix
from ..errors import DomainError, ShapeError
from ..funcore import ChebFun, Domain, constant, cumsum, derivative, multiply
from ..quasimatrix import Quasimatrix

__all__ = [
    "Term",
    "OperatorExpr",
    "BCTerm",
    "BoundaryFunctional",
    "BasisGroup",
    "SolverConfig",
    "EigProblem",
    "EigResult",
    "apply_operator",
    "bc_matrices",
    "assemble",
    "dirichlet",
    "continuity_rows",
]

_ACTIONS = ("id", "d", "cumsum")


@dataclass(frozen=True)
class Term:
    """``coeff * action(u)``; ``coeff`` is a scalar or a ChebFun."""

    action: str = "id"
    order: int = 0
    coeff: object = 1.0

    def __post_init__(self):
        if self.action not in _ACTIONS:
            raise ValueError(f"unknown action {self.action!r}; expected one of {_ACTIONS}")
        if self.order < 0:
            raise ValueError("action order must be nonnegative")
        if self.action == "id" and self.order != 0:
            object.__setattr__(self, "order", 0)

    @property
    def label(self) -> str:
        return "id" if self.action == "id" else f"{self.action}{self.order}"

    def act(self, u: ChebFun) -> ChebFun:
        if self.action == "d" and self.order:
            return derivative(u, self.order)
        if self.action == "cumsum" and self.order:
            return cumsum(u, self.order)
        return u


class OperatorExpr:
    """A linear operator ``sum_i coeff_i * action_i``.

    Build with the class helpers and ``+``, ``-`` and scalar ``*``::

        L = eps * OperatorExpr.d(2) + OperatorExpr.mul(x)
    """

    def __init__(self, terms: Sequence[Term]):
        terms = tuple(terms)
        if not terms:
            raise ValueError("an operator needs at least one term")
        self.terms = terms

    @classmethod
    def identity(cls, coeff=1.0) -> "OperatorExpr":
        return cls([Term("id", 0, coeff)])

    mul = identity

    @classmethod
    def d(cls, k: int = 1, coeff=1.0) -> "OperatorExpr":
        return cls([Term("d", k, coeff)])

    @classmethod
    def cumsum(cls, k: int = 1, coeff=1.0) -> "OperatorExpr":
        return cls([Term("cumsum", k, coeff)])

    @classmethod
    def zero(cls) -> "OperatorExpr":
        return cls([Term("id", 0, 0.0)])

    def __add__(self, other: "OperatorExpr") -> "OperatorExpr":
        return OperatorExpr(self.terms + other.terms)

    def __neg__(self) -> "OperatorExpr":
        return self * -1.0

    def __sub__(self, other: "OperatorExpr") -> "OperatorExpr":
        return self + (-other)

    def __mul__(self, alpha) -> "OperatorExpr":
        """Left multiplication by a scalar or a coefficient function."""
        return OperatorExpr([Term(t.action, t.order, _coeff_product(t.coeff, alpha)) for t in self.terms])

    __rmul__ = __mul__

    def __repr__(self) -> str:
        parts = []
        for t in self.terms:
            c = "f(x)" if isinstance(t.coeff, ChebFun) else f"{complex(t.coeff):g}"
            parts.append(f"{c}*{t.label}")
        return "OperatorExpr(" + " + ".join(parts) + ")"

    @property
    def max_derivative(self) -> int:
        return max((t.order for t in self.terms if t.action == "d"), default=0)

    @property
    def is_identity(self) -> bool:
        return (
            len(self.terms) == 1
            and self.terms[0].action == "id"
            and not isinstance(self.terms[0].coeff, ChebFun)
            and complex(self.terms[0].coeff) == 1
        )

    def breakpoints(self) -> np.ndarray:
        """Interior breakpoints of the variable coefficients."""
        pts = [t.coeff.breaks[1:-1] for t in self.terms if isinstance(t.coeff, ChebFun)]
        return np.unique(np.concatenate(pts)) if pts else np.zeros(0)

    def __call__(self, u: ChebFun) -> ChebFun:
        cache: dict = {}
        out = None
        for t in self.terms:
            key = (t.action, t.order)
            if key not in cache:
                cache[key] = t.act(u)
            v = cache[key]
            if isinstance(t.coeff, ChebFun):
                v = multiply(t.coeff, v)
            else:
                c = complex(t.coeff)
                if c == 0:
                    v = constant(0.0, u.domain)
                elif c != 1:
                    v = v.scale(c)
            out = v if out is None else out + v
        return out


def _coeff_product(a, b):
    if isinstance(a, ChebFun) and isinstance(b, ChebFun):
        return multiply(a, b)
    if isinstance(a, ChebFun):
        return a.scale(b)
    if isinstance(b, ChebFun):
        return b.scale(a)
    return complex(a) * complex(b)


def apply_operator(e: OperatorExpr, Q: Quasimatrix) -> Quasimatrix:
    """Columnwise application of an operator expression."""
    return Quasimatrix([e(q) for q in Q.columns])


# --------------------------------------------------------------------------
# boundary functionals
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BCTerm:
    """``weight * u^(order)(point)``; ``side`` picks the piece at a breakpoint."""

    point: float
    order: int = 0
    weight: complex = 1.0
    side: str = "right"

    def evaluate(self, u: ChebFun) -> complex:
        v = derivative(u, self.order) if self.order else u
        return complex(self.weight) * complex(v(self.point, side=self.side))


@dataclass(frozen=True)
class BoundaryFunctional:
    """The condition ``sum(terms)(u) - value = lambda * sum(lambda_terms)(u)``."""

    terms: tuple = ()
    lambda_terms: tuple = ()
    value: complex = 0.0

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "lambda_terms", tuple(self.lambda_terms))
        if not self.terms and not self.lambda_terms:
            raise ValueError("a boundary functional needs at least one term")

    @property
    def depends_on_lambda(self) -> bool:
        return any(complex(t.weight) != 0 for t in self.lambda_terms)

    def points(self):
        return [t.point for t in self.terms + self.lambda_terms]


def dirichlet(point: float, value: complex = 0.0) -> BoundaryFunctional:
    return BoundaryFunctional((BCTerm(point, 0, 1.0),), (), value)


def continuity_rows(point: float, orders: Sequence[int]) -> list[BoundaryFunctional]:
    """Jump conditions ``u^(k)(point-) - u^(k)(point+) = 0``."""
    return [
        BoundaryFunctional((BCTerm(point, k, 1.0, "left"), BCTerm(point, k, -1.0, "right")))
        for k in orders
    ]


# --------------------------------------------------------------------------
# problems
# --------------------------------------------------------------------------

@dataclass
class BasisGroup:
    """Basis columns sharing one role in the pencil.

    ``exprA``/``exprB`` produce the columns of the two pencil quasimatrices;
    ``solution`` maps a column to its contribution to the solution u, which
    is what boundary functionals and eigenfunctions see.  For plain bases
    ``solution`` is the identity; for integral reformulations it is the
    repeated integral that recovers u from the unknown highest derivative.
    """

    columns: Quasimatrix
    exprA: OperatorExpr
    exprB: OperatorExpr = field(default_factory=OperatorExpr.identity)
    solution: OperatorExpr = field(default_factory=OperatorExpr.identity)
    name: str = ""

    @property
    def n(self) -> int:
        return self.columns.n

    @cached_property
    def solution_columns(self) -> Quasimatrix:
        if self.solution.is_identity:
            return self.columns
        return apply_operator(self.solution, self.columns)


@dataclass(frozen=True)
class SolverConfig:
    """Residual filter ``tol``, row weights ``alpha``/``beta`` and mode flags.

    ``scale_columns`` equilibrates the pencil columns (unit norm of each
    stacked column ``[A_j; B_j]``) before the SVD; eigenvalues of consistent
    pencils are unchanged, while rounding in the coefficient vectors no
    longer gets amplified by large operator columns.
    """

    tol: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0
    balance: bool = False
    bc_mode: str = "leastsquares"
    scale_columns: bool = True

    def __post_init__(self):
        if not 0 < self.tol <= 1:
            raise ValueError(f"tol must lie in (0, 1], got {self.tol}")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("row weights must be positive")
        if self.bc_mode not in ("leastsquares", "exact"):
            raise ValueError(f"bc_mode must be 'leastsquares' or 'exact', got {self.bc_mode!r}")


@dataclass
class EigProblem:
    groups: list
    bcs: list = field(default_factory=list)
    config: SolverConfig = field(default_factory=SolverConfig)
    name: str = ""

    def __post_init__(self):
        self.groups = list(self.groups)
        self.bcs = list(self.bcs)
        if not self.groups:
            raise ShapeError("a problem needs at least one basis group")
        dom = self.groups[0].columns.domain
        for g in self.groups[1:]:
            if g.columns.domain != dom:
                raise DomainError("basis groups live on different domains")
        for bc in self.bcs:
            for x in bc.points():
                if not dom.contains(x):
                    raise DomainError(f"boundary point {x} outside [{dom.a}, {dom.b}]")
        if self.d > self.n:
            raise ShapeError(f"{self.d} boundary rows exceed the {self.n} basis columns")

    @property
    def domain(self) -> Domain:
        return self.groups[0].columns.domain

    @property
    def n(self) -> int:
        return sum(g.n for g in self.groups)

    @property
    def d(self) -> int:
        return len(self.bcs)

    def solution_basis(self) -> Quasimatrix:
        cols = []
        for g in self.groups:
            cols.extend(g.solution_columns.columns)
        return Quasimatrix(cols)

    def with_config(self, **kw) -> "EigProblem":
        cfg = SolverConfig(**{**self.config.__dict__, **kw})
        return EigProblem(self.groups, self.bcs, cfg, self.name)


@dataclass
class EigResult:
    lam: complex
    coeffs: np.ndarray
    eigenfunction: ChebFun
    relres: float
    bc_residual: float = 0.0

    @property
    def value(self) -> complex:
        return self.lam


def bc_matrices(bcs: Sequence[BoundaryFunctional], groups: Sequence[BasisGroup]):
    """``(B_A, B_B)`` with ``(B_A - lambda B_B) c = 0`` expressing the conditions."""
    cols = []
    for g in groups:
        cols.extend(g.solution_columns.columns)
    d, n = len(bcs), len(cols)
    BA = np.zeros((d, n), dtype=np.complex128)
    BB = np.zeros((d, n), dtype=np.complex128)
    derivs: dict = {}

    def value(j, t: BCTerm):
        key = (j, t.order)
        if key not in derivs:
            derivs[key] = derivative(cols[j], t.order) if t.order else cols[j]
        return complex(t.weight) * complex(derivs[key](t.point, side=t.side))

    for i, bc in enumerate(bcs):
        for j in range(n):
            BA[i, j] = sum((value(j, t) for t in bc.terms), 0.0)
            BB[i, j] = sum((value(j, t) for t in bc.lambda_terms), 0.0)
    return BA, BB


def bc_values(bcs: Sequence[BoundaryFunctional]) -> np.ndarray:
    return np.array([complex(bc.value) for bc in bcs], dtype=np.complex128)


def assemble(problem: EigProblem, weighted: bool = True):
    """The block pencil ``([L_A U; B_A], [L_B U; B_B])`` with row weights applied."""
    topA, topB = [], []
    for g in problem.groups:
        topA.extend(apply_operator(g.exprA, g.columns).columns)
        topB.extend(apply_operator(g.exprB, g.columns).columns)
    BA, BB = bc_matrices(problem.bcs, problem.groups)
    A = BlockQuasimatrix(Quasimatrix(topA), BA)
    B = BlockQuasimatrix(Quasimatrix(topB), BB)
    if weighted:
        cfg = problem.config
        A = A.scale_rows(cfg.alpha, cfg.beta)
        B = B.scale_rows(cfg.alpha, cfg.beta)
    return A, B
