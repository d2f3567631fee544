"""Shared oracles and random generators for the test suite.

The oracles discretize functions on quadrature grids built here from numpy
alone, so they share no code with the package's coefficient-space algebra.
"""

from __future__ import annotations

import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from quasispec.funcore import ChebFun

settings.register_profile(
    "default",
    deadline=None,
    max_examples=int(os.environ.get("QUASISPEC_HYPOTHESIS_EXAMPLES", "40")),
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def random_chebfun(rng: np.random.Generator, degree: int, domain=(-1.0, 1.0), complex_=True, decay=0.0) -> ChebFun:
    c = rng.standard_normal(degree + 1)
    if complex_:
        c = c + 1j * rng.standard_normal(degree + 1)
    if decay:
        c = c * np.exp(-decay * np.arange(degree + 1))
    return ChebFun(list(domain), [c])


def random_piecewise(rng, degrees, breaks) -> ChebFun:
    return ChebFun(breaks, [rng.standard_normal(k + 1) + 1j * rng.standard_normal(k + 1) for k in degrees])


def gauss_legendre_rows(funs, extra_points: int = 4):
    """Rows ``sqrt(w_i) f_j(x_i)`` on a Gauss-Legendre grid exact for all products.

    Returns a matrix whose Gram matrix equals the L2 Gram matrix of ``funs``
    up to rounding, whenever the functions are piecewise polynomials.
    """
    breaks = np.unique(np.concatenate([f.breaks for f in funs]))
    blocks = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        deg = max(max(f.lengths) for f in funs)
        t, w = np.polynomial.legendre.leggauss(deg + extra_points)
        half, mid = 0.5 * (b - a), 0.5 * (a + b)
        x = mid + half * t
        # nudge off breakpoints is unnecessary: Gauss nodes are interior
        vals = np.column_stack([f(x) for f in funs])
        blocks.append(np.sqrt(w * half)[:, None] * vals)
    return np.vstack(blocks)


def clenshaw_curtis(npts: int, a: float = -1.0, b: float = 1.0):
    """Nodes and weights of the ``npts``-point Clenshaw-Curtis rule (direct cosine sum)."""
    N = npts - 1
    theta = np.pi * np.arange(npts) / N
    x = -np.cos(theta)
    w = np.ones(npts)
    for j in range(1, N // 2 + 1):
        bj = 1.0 if 2 * j == N else 2.0
        w -= bj * np.cos(2 * j * theta) / (4 * j * j - 1)
    c = np.full(npts, 2.0)
    c[0] = c[-1] = 1.0
    w *= c / N
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * x, w * half


def l2_oracle_gram(funs) -> np.ndarray:
    V = gauss_legendre_rows(funs)
    return V.conj().T @ V


def l2_oracle_norm(f) -> float:
    return float(np.linalg.norm(gauss_legendre_rows([f])))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
