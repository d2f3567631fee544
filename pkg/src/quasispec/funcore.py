"""Adaptive piecewise Chebyshev representation of functions on an interval.

A :class:`ChebFun` stores, for each subinterval of its domain, complex
coefficients in the Chebyshev basis mapped affinely to that subinterval.
Everything here is immutable; operations return new objects.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.fft

from . import _kernels
from .errors import ConstructionError, DomainError, UnresolvedFunctionError

__all__ = [
    "Domain",
    "ChebFun",
    "default_tol",
    "from_callable",
    "from_coeffs",
    "constant",
    "identity",
    "chebpoly",
    "legpoly",
    "piecewise",
    "evaluate",
    "derivative",
    "cumsum",
    "definite_integral",
    "inner",
    "multiply",
    "norm_l2",
    "chebpts",
    "vals2coeffs",
    "coeffs2vals",
    "clenshaw_curtis_weights",
]

MAX_POINTS = 2**16 + 1
_EPS = np.finfo(float).eps


def default_tol() -> float:
    """Construction tolerance, overridable through ``QUASISPEC_DEFAULT_TOL``."""
    raw = os.environ.get("QUASISPEC_DEFAULT_TOL")
    if raw is None:
        return 1e-13
    tol = float(raw)
    if not 0.0 < tol < 1.0:
        raise ValueError(f"QUASISPEC_DEFAULT_TOL must lie in (0, 1), got {raw!r}")
    return tol


@dataclass(frozen=True)
class Domain:
    """Closed finite interval [a, b] with a < b."""

    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise DomainError(f"domain endpoints must be finite, got [{a}, {b}]")
        if not a < b:
            raise DomainError(f"domain needs a < b, got [{a}, {b}]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def length(self) -> float:
        return self.b - self.a

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        slack = 1e-14 * max(1.0, abs(self.a), abs(self.b))
        return (x >= self.a - slack) & (x <= self.b + slack)

    def to_local(self, x):
        return (2.0 * np.asarray(x, dtype=float) - (self.a + self.b)) / self.length

    def from_local(self, t):
        return 0.5 * (self.a + self.b) + 0.5 * self.length * np.asarray(t, dtype=float)

    def __iter__(self):
        yield self.a
        yield self.b


def as_domain(dom) -> Domain:
    if isinstance(dom, Domain):
        return dom
    a, b = dom
    return Domain(a, b)


# --------------------------------------------------------------------------
# Chebyshev point / coefficient transforms
# --------------------------------------------------------------------------

def chebpts(npts: int) -> np.ndarray:
    """Chebyshev points of the second kind, ``cos(pi j / (npts-1))``.

    The ordering runs from +1 down to -1; a single point is the midpoint 0.
    """
    if npts == 1:
        return np.zeros(1)
    j = np.arange(npts)
    return np.cos(np.pi * j / (npts - 1))


def vals2coeffs(values: np.ndarray) -> np.ndarray:
    """Chebyshev coefficients from values at :func:`chebpts` (along axis 0)."""
    values = np.asarray(values, dtype=np.complex128)
    npts = values.shape[0]
    if npts == 1:
        return values.copy()
    K = npts - 1
    c = scipy.fft.dct(values, type=1, axis=0) / K
    c[0] *= 0.5
    c[-1] *= 0.5
    return c


def coeffs2vals(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vals2coeffs`."""
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    npts = coeffs.shape[0]
    if npts == 1:
        return coeffs.copy()
    y = scipy.fft.dct(coeffs, type=1, axis=0)
    sign = (-1.0) ** np.arange(npts)
    if coeffs.ndim > 1:
        sign = sign.reshape((-1,) + (1,) * (coeffs.ndim - 1))
    return 0.5 * (y + coeffs[0] + sign * coeffs[-1])


def _cheb_integrals(n: int) -> np.ndarray:
    """Integrals of T_0..T_{n-1} over [-1, 1]."""
    k = np.arange(n)
    out = np.zeros(n)
    even = k % 2 == 0
    out[even] = 2.0 / (1.0 - k[even] ** 2)
    return out


def clenshaw_curtis_weights(npts: int) -> np.ndarray:
    """Clenshaw-Curtis weights on [-1, 1] matching :func:`chebpts` ordering."""
    if npts == 1:
        return np.array([2.0])
    K = npts - 1
    m = _cheb_integrals(npts)
    s = np.ones(npts)
    s[0] = s[-1] = 0.5
    g = m * s
    y = scipy.fft.dct(g, type=1)
    sign = (-1.0) ** np.arange(npts)
    cos_sum = 0.5 * (y + g[0] + sign * g[-1])
    t = np.full(npts, 2.0)
    t[0] = t[-1] = 1.0
    return t * cos_sum / K


# --------------------------------------------------------------------------
# chopping
# --------------------------------------------------------------------------

def _chop_length(coeffs: np.ndarray, rel: float, scale: float | None = None) -> int:
    """Length after dropping the tail whose envelope is below ``rel * scale``."""
    a = np.abs(coeffs)
    if scale is None:
        scale = a.max() if a.size else 0.0
    if scale == 0.0:
        return 1
    env = np.maximum.accumulate(a[::-1])[::-1]
    above = np.nonzero(env > rel * scale)[0]
    if above.size == 0:
        return 1
    return int(above[-1]) + 1


def _trim(coeffs: np.ndarray, rel: float, scale: float | None = None) -> np.ndarray:
    return coeffs[: _chop_length(coeffs, rel, scale)].copy()


# --------------------------------------------------------------------------
# ChebFun
# --------------------------------------------------------------------------

class ChebFun:
    """Piecewise Chebyshev series on a :class:`Domain`.

    ``breaks`` holds the piece endpoints (first = a, last = b) and
    ``coeffs[p]`` the complex coefficients of piece ``p`` in its local
    variable t in [-1, 1].
    """

    __slots__ = ("domain", "breaks", "coeffs")

    def __init__(self, breaks: Sequence[float], coeffs: Sequence[np.ndarray]):
        breaks = np.array(breaks, dtype=float)
        if breaks.ndim != 1 or breaks.size < 2:
            raise DomainError("need at least two breakpoints")
        if np.any(np.diff(breaks) <= 0):
            raise DomainError(f"breakpoints must be strictly increasing: {breaks}")
        if len(coeffs) != breaks.size - 1:
            raise ValueError("one coefficient array per piece required")
        cs = []
        for c in coeffs:
            c = np.array(c, dtype=np.complex128).ravel()
            if c.size == 0:
                c = np.zeros(1, dtype=np.complex128)
            if not np.all(np.isfinite(c)):
                raise ConstructionError("non-finite Chebyshev coefficients")
            c.flags.writeable = False
            cs.append(c)
        breaks.flags.writeable = False
        self.domain = Domain(breaks[0], breaks[-1])
        self.breaks = breaks
        self.coeffs = tuple(cs)

    # -- structure ---------------------------------------------------------
    @property
    def npieces(self) -> int:
        return len(self.coeffs)

    @property
    def pieces(self):
        return [
            (Domain(self.breaks[p], self.breaks[p + 1]), self.coeffs[p])
            for p in range(self.npieces)
        ]

    @property
    def lengths(self) -> list[int]:
        return [c.size for c in self.coeffs]

    @property
    def vscale(self) -> float:
        """Max absolute coefficient, a cheap magnitude scale."""
        return max(float(np.abs(c).max()) for c in self.coeffs)

    @property
    def isreal(self) -> bool:
        return all(np.all(c.imag == 0) for c in self.coeffs)

    def __repr__(self) -> str:
        return (
            f"ChebFun(domain=[{self.domain.a:g}, {self.domain.b:g}], "
            f"pieces={self.npieces}, lengths={self.lengths})"
        )

    # -- evaluation --------------------------------------------------------
    def _piece_index(self, x: np.ndarray, side: str) -> np.ndarray:
        inner = self.breaks[1:-1]
        if side == "left":
            idx = np.searchsorted(inner, x, side="left")
        else:
            idx = np.searchsorted(inner, x, side="right")
        return idx

    def __call__(self, x, side: str = "right"):
        scalar = np.ndim(x) == 0
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        if not np.all(self.domain.contains(xa)):
            raise DomainError(f"point(s) outside [{self.domain.a}, {self.domain.b}]")
        idx = self._piece_index(xa, side)
        out = np.empty(xa.shape, dtype=np.complex128)
        for p in np.unique(idx):
            sel = idx == p
            t = np.clip(Domain(self.breaks[p], self.breaks[p + 1]).to_local(xa[sel]), -1.0, 1.0)
            out[sel] = _kernels.clenshaw(self.coeffs[p], t)
        return out[0] if scalar else out

    def values_on(self, dom: Domain, npts: int) -> np.ndarray:
        """Values at the ``npts`` Chebyshev points of ``dom``.

        ``dom`` must lie inside a single piece (up to rounding).
        """
        p = self.piece_containing(dom)
        cp = self.coeffs[p]
        pdom = Domain(self.breaks[p], self.breaks[p + 1])
        if np.isclose(pdom.a, dom.a, rtol=0, atol=1e-14 * pdom.length) and np.isclose(
            pdom.b, dom.b, rtol=0, atol=1e-14 * pdom.length
        ):
            if cp.size <= npts:
                padded = np.zeros(npts, dtype=np.complex128)
                padded[: cp.size] = cp
                return coeffs2vals(padded)
        t = np.clip(pdom.to_local(dom.from_local(chebpts(npts))), -1.0, 1.0)
        return _kernels.clenshaw(cp, t)

    def piece_containing(self, dom: Domain) -> int:
        mid = 0.5 * (dom.a + dom.b)
        return int(self._piece_index(np.array([mid]), "right")[0])

    def coeffs_on(self, dom: Domain) -> np.ndarray:
        """Coefficients of the restriction to a subinterval of one piece."""
        p = self.piece_containing(dom)
        n = self.coeffs[p].size
        return vals2coeffs(self.values_on(dom, n))

    def refine(self, breaks: Sequence[float]) -> "ChebFun":
        """Same function re-expressed on a finer breakpoint set."""
        breaks = np.asarray(breaks, dtype=float)
        if breaks.size == self.breaks.size and np.array_equal(breaks, self.breaks):
            return self
        cs = [self.coeffs_on(Domain(breaks[i], breaks[i + 1])) for i in range(breaks.size - 1)]
        return ChebFun(breaks, cs)

    # -- algebra -----------------------------------------------------------
    def _binary(self, other: "ChebFun", op) -> "ChebFun":
        _check_same_domain(self, other)
        brk = merge_breaks(self.breaks, other.breaks)
        u, v = self.refine(brk), other.refine(brk)
        scale = max(u.vscale, v.vscale)
        cs = []
        for cu, cv in zip(u.coeffs, v.coeffs):
            n = max(cu.size, cv.size)
            a = np.zeros(n, dtype=np.complex128)
            b = np.zeros(n, dtype=np.complex128)
            a[: cu.size] = cu
            b[: cv.size] = cv
            cs.append(_trim(op(a, b), _EPS, scale))
        return ChebFun(brk, cs)

    def __add__(self, other):
        if isinstance(other, ChebFun):
            return self._binary(other, np.add)
        return self._binary(constant(other, self.domain), np.add)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, ChebFun):
            return self._binary(other, np.subtract)
        return self._binary(constant(other, self.domain), np.subtract)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return ChebFun(self.breaks, [-c for c in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, ChebFun):
            return multiply(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def __truediv__(self, alpha):
        return self.scale(1.0 / alpha)

    def scale(self, alpha) -> "ChebFun":
        alpha = complex(alpha)
        return ChebFun(self.breaks, [alpha * c for c in self.coeffs])

    def conj(self) -> "ChebFun":
        return ChebFun(self.breaks, [np.conj(c) for c in self.coeffs])

    # -- calculus ----------------------------------------------------------
    def derivative(self, k: int = 1) -> "ChebFun":
        return derivative(self, k)

    def cumsum(self, k: int = 1) -> "ChebFun":
        return cumsum(self, k)

    def definite_integral(self) -> complex:
        return definite_integral(self)

    def norm(self) -> float:
        return norm_l2(self)

    def simplify(self, tol: float | None = None) -> "ChebFun":
        """Chop every piece to ``tol`` relative to the global scale."""
        tol = default_tol() if tol is None else tol
        scale = self.vscale
        return ChebFun(self.breaks, [_trim(c, tol, scale) for c in self.coeffs])


def merge_breaks(*breaksets) -> np.ndarray:
    """Sorted union of breakpoint arrays, merging rounding-level duplicates."""
    allb = np.sort(np.concatenate([np.asarray(b, dtype=float) for b in breaksets]))
    span = allb[-1] - allb[0]
    keep = [allb[0]]
    for x in allb[1:]:
        if x - keep[-1] > 1e-14 * span:
            keep.append(x)
    keep[-1] = allb[-1]
    return np.array(keep)


def _check_same_domain(u: ChebFun, v: ChebFun):
    if u.domain != v.domain:
        da, db = u.domain, v.domain
        if not (
            math.isclose(da.a, db.a, rel_tol=0, abs_tol=1e-14 * da.length)
            and math.isclose(da.b, db.b, rel_tol=0, abs_tol=1e-14 * da.length)
        ):
            raise DomainError(f"domain mismatch: [{da.a}, {da.b}] vs [{db.a}, {db.b}]")


# --------------------------------------------------------------------------
# constructors
# --------------------------------------------------------------------------

def _sample(f: Callable, x: np.ndarray) -> np.ndarray:
    try:
        y = f(x)
        y = np.asarray(y, dtype=np.complex128)
        if y.shape != x.shape:
            y = np.broadcast_to(y, x.shape).astype(np.complex128)
    except (TypeError, ValueError):
        y = np.array([complex(f(float(xi))) for xi in x], dtype=np.complex128)
    if not np.all(np.isfinite(y)):
        raise ConstructionError("function returned non-finite values")
    return y


def _adaptive_piece(f: Callable, dom: Domain, tol: float) -> np.ndarray:
    npts = 17
    while npts <= MAX_POINTS:
        x = dom.from_local(chebpts(npts))
        c = vals2coeffs(_sample(f, x))
        length = _chop_length(c, tol)
        tail = npts - length
        if tail >= max(3, npts // 10):
            return c[:length].copy()
        npts = 2 * npts - 1
    raise UnresolvedFunctionError(
        f"function not resolved on [{dom.a}, {dom.b}] with {MAX_POINTS} points"
    )


def from_callable(f: Callable, domain=(-1.0, 1.0), tol: float | None = None) -> ChebFun:
    """Adaptively resolve ``f`` on ``domain`` to relative tolerance ``tol``."""
    dom = as_domain(domain)
    tol = default_tol() if tol is None else float(tol)
    if not 0.0 < tol < 1.0:
        raise ValueError("tol must lie in (0, 1)")
    return ChebFun([dom.a, dom.b], [_adaptive_piece(f, dom, tol)])


def from_coeffs(coeffs, domain=(-1.0, 1.0)) -> ChebFun:
    dom = as_domain(domain)
    return ChebFun([dom.a, dom.b], [np.asarray(coeffs, dtype=np.complex128)])


def constant(value, domain=(-1.0, 1.0)) -> ChebFun:
    return from_coeffs([value], domain)


def identity(domain=(-1.0, 1.0)) -> ChebFun:
    """The function x on ``domain``."""
    dom = as_domain(domain)
    mid, half = 0.5 * (dom.a + dom.b), 0.5 * dom.length
    return from_coeffs([mid, half], dom)


def chebpoly(k: int, domain=(-1.0, 1.0)) -> ChebFun:
    """T_k mapped to ``domain``."""
    c = np.zeros(k + 1, dtype=np.complex128)
    c[k] = 1.0
    return from_coeffs(c, domain)


def legpoly(k: int, domain=(-1.0, 1.0)) -> ChebFun:
    """Legendre P_k mapped to ``domain`` (exact values via the recurrence)."""
    dom = as_domain(domain)
    npts = k + 1
    t = chebpts(npts)
    p_prev, p = np.ones_like(t), t.copy()
    if k == 0:
        vals = p_prev
    else:
        for j in range(1, k):
            p_prev, p = p, ((2 * j + 1) * t * p - j * p_prev) / (j + 1)
        vals = p
    return ChebFun([dom.a, dom.b], [vals2coeffs(vals)])


def piecewise(domain, breakpoints: Sequence[float], pieces: Sequence, tol: float | None = None) -> ChebFun:
    """Assemble a function from one definition per subinterval.

    Each entry of ``pieces`` may be a scalar, a callable of x, or a
    coefficient array (interpreted in the local variable of its piece).
    No continuity is imposed across breakpoints.
    """
    dom = as_domain(domain)
    bp = np.asarray(breakpoints, dtype=float)
    if bp.size and (np.any(np.diff(bp) <= 0) or bp[0] <= dom.a or bp[-1] >= dom.b):
        raise DomainError("breakpoints must be sorted and strictly inside the domain")
    breaks = np.concatenate([[dom.a], bp, [dom.b]])
    if len(pieces) != breaks.size - 1:
        raise ValueError(f"expected {breaks.size - 1} piece definitions, got {len(pieces)}")
    tol = default_tol() if tol is None else tol
    cs = []
    for i, spec in enumerate(pieces):
        sub = Domain(breaks[i], breaks[i + 1])
        if callable(spec):
            cs.append(_adaptive_piece(spec, sub, tol))
        elif np.ndim(spec) == 0:
            cs.append(np.array([spec], dtype=np.complex128))
        else:
            cs.append(np.asarray(spec, dtype=np.complex128))
    return ChebFun(breaks, cs)


# --------------------------------------------------------------------------
# operations
# --------------------------------------------------------------------------

def evaluate(u: ChebFun, x, side: str = "right"):
    """Value(s) of ``u`` at ``x``; interior breakpoints use the right piece
    unless ``side='left'``."""
    return u(x, side=side)


def derivative(u: ChebFun, k: int = 1) -> ChebFun:
    if k < 0:
        raise ValueError("derivative order must be nonnegative")
    cs = list(u.coeffs)
    for p in range(len(cs)):
        fac = 2.0 / (u.breaks[p + 1] - u.breaks[p])
        c = cs[p]
        for _ in range(k):
            c = _kernels.chebder(c) * fac
        cs[p] = c
    return ChebFun(u.breaks, cs)


def cumsum(u: ChebFun, k: int = 1) -> ChebFun:
    """k-fold indefinite integral vanishing (with its lower integrals) at a."""
    if k < 0:
        raise ValueError("integration order must be nonnegative")
    cs = list(u.coeffs)
    for _ in range(k):
        acc = 0.0 + 0.0j
        new = []
        for p, c in enumerate(cs):
            half = 0.5 * (u.breaks[p + 1] - u.breaks[p])
            ci = _kernels.chebint(c) * half
            ci[0] += acc
            acc = complex(ci.sum())  # value at the right end, T_k(1) = 1
            new.append(ci)
        cs = new
    return ChebFun(u.breaks, cs)


def definite_integral(u: ChebFun) -> complex:
    total = 0.0 + 0.0j
    for p, c in enumerate(u.coeffs):
        half = 0.5 * (u.breaks[p + 1] - u.breaks[p])
        total += half * complex(np.dot(_cheb_integrals(c.size), c))
    return total


def _product_pieces(u: ChebFun, v: ChebFun):
    _check_same_domain(u, v)
    brk = merge_breaks(u.breaks, v.breaks)
    uu, vv = u.refine(brk), v.refine(brk)
    cs = []
    for cu, cv in zip(uu.coeffs, vv.coeffs):
        n = cu.size + cv.size - 1
        a = np.zeros(n, dtype=np.complex128)
        b = np.zeros(n, dtype=np.complex128)
        a[: cu.size] = cu
        b[: cv.size] = cv
        cs.append(vals2coeffs(coeffs2vals(a) * coeffs2vals(b)))
    return brk, cs


def multiply(u: ChebFun, v: ChebFun, tol: float | None = None) -> ChebFun:
    """Pointwise product, chopped to the construction tolerance."""
    tol = default_tol() if tol is None else tol
    brk, cs = _product_pieces(u, v)
    scale = max(np.abs(c).max() for c in cs)
    total = sum(c.size for c in cs)
    if max(c.size for c in cs) > MAX_POINTS:
        raise UnresolvedFunctionError(f"product needs {total} coefficients")
    return ChebFun(brk, [_trim(c, tol, scale) for c in cs])


def inner(u: ChebFun, v: ChebFun) -> complex:
    """L2 inner product, conjugating the first argument."""
    brk, cs = _product_pieces(u.conj(), v)
    return definite_integral(ChebFun(brk, cs))


def norm_l2(u: ChebFun) -> float:
    return math.sqrt(max(inner(u, u).real, 0.0))
