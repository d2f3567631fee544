import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import clenshaw_curtis, gauss_legendre_rows, random_chebfun, random_piecewise
from quasispec.errors import ConstructionError, DomainError, UnresolvedFunctionError
from quasispec.funcore import (
    ChebFun,
    Domain,
    chebpoly,
    constant,
    cumsum,
    default_tol,
    definite_integral,
    derivative,
    evaluate,
    from_callable,
    from_coeffs,
    identity,
    inner,
    legpoly,
    multiply,
    norm_l2,
    piecewise,
)

seeds = st.integers(0, 2**32 - 1)


# -- construction -------------------------------------------------------------

def test_constant_and_identity_coefficients():
    np.testing.assert_array_equal(from_callable(lambda x: np.ones_like(x)).coeffs[0], [1])
    np.testing.assert_allclose(from_callable(lambda x: x).coeffs[0], [0, 1], atol=1e-15)


def test_exp_integral():
    u = from_callable(np.exp)
    assert abs(definite_integral(u) - (math.e - 1 / math.e)) <= 1e-13


def test_construction_tolerance_is_met():
    f = lambda x: np.sin(5 * x) / (1 + 4 * x * x)
    u = from_callable(f, (-2.0, 3.0))
    x = np.linspace(-2, 3, 997)
    assert np.max(np.abs(u(x) - f(x))) <= 1e-13 * 10


def test_nonfinite_samples_fail():
    with pytest.raises(ConstructionError):
        from_callable(lambda x: 1 / x)


def test_unresolved_function_fails():
    with pytest.raises(UnresolvedFunctionError):
        from_callable(lambda x: np.sign(x - 0.1234))


def test_domain_validation():
    with pytest.raises(DomainError):
        Domain(1.0, 1.0)
    with pytest.raises(DomainError):
        Domain(0.0, math.inf)


def test_default_tol_env(monkeypatch):
    assert default_tol() == 1e-13
    monkeypatch.setenv("QUASISPEC_DEFAULT_TOL", "1e-6")
    assert default_tol() == 1e-6
    assert from_callable(np.exp).lengths[0] < from_callable(np.exp, tol=1e-13).lengths[0]
    monkeypatch.setenv("QUASISPEC_DEFAULT_TOL", "2")
    with pytest.raises(ValueError):
        default_tol()


def test_coefficients_are_complex_and_chopped():
    u = from_callable(np.cos)
    assert u.coeffs[0].dtype == np.complex128
    assert u.isreal
    assert abs(u.coeffs[0][-1]) > 0


# -- evaluation -----------------------------------------------------------------

def test_eval_examples():
    assert evaluate(chebpoly(3), 0.5) == pytest.approx(-1.0)
    assert evaluate(constant(7.0), 0.3) == 7
    s = from_callable(lambda x: np.sin(np.pi * (x + 1) / 2))  # sin on [0, pi] mapped to [-1, 1]
    assert abs(s(1 / 6 * 2 - 1) - 0.5) <= 1e-13


def test_eval_outside_domain():
    with pytest.raises(DomainError):
        identity()(1.5)


def test_breakpoint_convention():
    u = piecewise((-1.0, 1.0), [0.0], [0.0, 1.0])
    assert u(0.0) == 1
    assert u(0.0, side="left") == 0


# -- calculus -------------------------------------------------------------------

def test_derivative_examples():
    np.testing.assert_allclose(derivative(chebpoly(2)).coeffs[0], [0, 4])
    assert norm_l2(derivative(constant(3.0))) == 0
    d = derivative(identity((0.0, 1.0)))
    assert d(0.3) == pytest.approx(1.0)
    np.testing.assert_allclose(d.coeffs[0], [1], atol=1e-15)


@pytest.mark.parametrize("n", [1, 2, 5, 12])
def test_derivative_recurrence_oracle(n):
    # d/dx T_n = n U_{n-1}, with U_{n-1}(cos t) = sin(n t) / sin t
    t = np.linspace(0.1, 3.0, 13)
    vals = derivative(chebpoly(n))(np.cos(t))
    np.testing.assert_allclose(vals, n * np.sin(n * t) / np.sin(t), atol=1e-12 * n * n)


def test_cumsum_examples():
    x = np.linspace(-1, 1, 11)
    np.testing.assert_allclose(cumsum(constant(1.0))(x), x + 1, atol=1e-15)
    np.testing.assert_allclose(cumsum(constant(1.0), 2)(x), (x + 1) ** 2 / 2, atol=1e-15)
    np.testing.assert_allclose(cumsum(chebpoly(1))(x), (x * x - 1) / 2, atol=1e-15)


def test_cumsum_is_continuous_across_pieces():
    u = piecewise((-1.0, 2.0), [0.0, 1.0], [1.0, -2.0, lambda x: x])
    U = cumsum(u, 2)
    for b in (0.0, 1.0):
        assert abs(U(b, side="left") - U(b, side="right")) <= 1e-14
        dU = derivative(U)
        assert abs(dU(b, side="left") - dU(b, side="right")) <= 1e-14
    assert U(-1.0) == 0


def test_definite_integral_examples():
    assert definite_integral(chebpoly(0)) == pytest.approx(2)
    assert abs(definite_integral(chebpoly(1))) <= 1e-16
    for k in (2, 4, 10):
        assert definite_integral(chebpoly(k)) == pytest.approx(2 / (1 - k * k), abs=1e-15)


def test_inner_examples():
    T0, T1 = chebpoly(0), chebpoly(1)
    assert inner(T0, T0) == pytest.approx(2)
    assert inner(T1, T1) == pytest.approx(2 / 3)
    assert abs(inner(T0, T1)) <= 1e-16
    assert inner(T0.scale(1j), T0) == pytest.approx(-2j)


def test_inner_domain_mismatch():
    with pytest.raises(DomainError):
        inner(chebpoly(1), chebpoly(1, (0.0, 1.0)))


def test_norm_examples():
    assert norm_l2(chebpoly(0)) == pytest.approx(math.sqrt(2))
    assert norm_l2(constant(0.0)) == 0
    assert norm_l2(chebpoly(1)) == pytest.approx(math.sqrt(2 / 3))


def test_multiply_examples():
    p = multiply(chebpoly(1), chebpoly(1))
    np.testing.assert_allclose(p.coeffs[0], [0.5, 0, 0.5], atol=1e-15)
    u = from_callable(np.exp)
    assert norm_l2(u * constant(1.0) - u) <= 1e-15
    ax = piecewise((-1.0, 1.0), [0.0], [lambda x: -x, lambda x: x])
    xx = piecewise((-1.0, 1.0), [-0.5], [lambda x: x, lambda x: x])
    np.testing.assert_array_equal((xx * ax).breaks, [-1.0, -0.5, 0.0, 1.0])


def test_legendre_polynomials():
    x = np.linspace(-1, 1, 9)
    np.testing.assert_allclose(legpoly(3)(x), (5 * x**3 - 3 * x) / 2, atol=1e-15)
    for j in range(5):
        for k in range(5):
            expected = 2 / (2 * j + 1) if j == k else 0.0
            assert abs(inner(legpoly(j), legpoly(k)) - expected) <= 1e-15


# -- piecewise ------------------------------------------------------------------

def test_piecewise_indicator():
    u = piecewise((-2.0, 2.0), [0.0], [0.0, 1.0])
    assert definite_integral(u) == pytest.approx(2.0)


def test_piecewise_left_supported_column():
    # T_k(2(x + 1/2)) on [-1, 0), zero on [0, 1]
    u = piecewise((-1.0, 1.0), [0.0], [chebpoly(3).coeffs[0], 0.0])
    x = np.linspace(-1, -0.01, 7)
    np.testing.assert_allclose(u(x), np.cos(3 * np.arccos(2 * (x + 0.5))), atol=1e-14)
    np.testing.assert_array_equal(u(np.linspace(0, 1, 5)), 0)


def test_piecewise_matches_unsplit():
    f = lambda x: np.exp(np.sin(2 * x))
    u = piecewise((-1.0, 1.0), [-0.3, 0.4], [f, f, f])
    v = from_callable(f)
    x = np.linspace(-1, 1, 1001)
    # both constructions are accurate to tol relative to the size of f
    assert np.max(np.abs(u(x) - v(x))) <= 1e-13 * np.max(np.abs(v(x)))


def test_piecewise_rejects_bad_breakpoints():
    with pytest.raises(DomainError):
        piecewise((-1.0, 1.0), [0.5, 0.2], [1.0, 2.0, 3.0])
    with pytest.raises(DomainError):
        piecewise((-1.0, 1.0), [1.0], [1.0, 2.0])


def test_chebfun_invariants():
    with pytest.raises(DomainError):
        ChebFun([0.0, 0.0], [[1.0]])
    with pytest.raises(ConstructionError):
        ChebFun([0.0, 1.0], [[np.nan]])
    u = ChebFun([0.0, 1.0], [[]])
    assert u.lengths == [1]


# -- properties -----------------------------------------------------------------

@given(seed=seeds, du=st.integers(0, 40), dv=st.integers(0, 40), alpha=st.complex_numbers(max_magnitude=1e3))
def test_linearity(seed, du, dv, alpha):
    rng = np.random.default_rng(seed)
    u, v = random_chebfun(rng, du), random_chebfun(rng, dv)
    x = rng.uniform(-1, 1, 8)
    lhs = (u.scale(alpha) + v)(x)
    rhs = alpha * u(x) + v(x)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(np.max(np.abs(rhs)), abs(alpha) * np.max(np.abs(u(x))), 1.0)


@given(seed=seeds, deg=st.integers(0, 50), a=st.floats(-5, 5), width=st.floats(0.1, 10))
def test_derivative_cumsum_round_trip(seed, deg, a, width):
    rng = np.random.default_rng(seed)
    u = random_chebfun(rng, deg, (a, a + width))
    back = derivative(cumsum(u, 1), 1)
    assert norm_l2(back - u) <= 1e-11 * norm_l2(u)


@given(seed=seeds, deg=st.integers(0, 50))
def test_integral_matches_cumsum_endpoint(seed, deg):
    rng = np.random.default_rng(seed)
    u = random_chebfun(rng, deg, (0.0, 3.0))
    I = definite_integral(u)
    assert abs(I - cumsum(u)(3.0)) <= 1e-12 * max(abs(I), norm_l2(u))


@given(seed=seeds, du=st.integers(0, 60), dv=st.integers(0, 60))
def test_inner_matches_clenshaw_curtis(seed, du, dv):
    rng = np.random.default_rng(seed)
    u, v = random_chebfun(rng, du, (-1.0, 2.0)), random_chebfun(rng, dv, (-1.0, 2.0))
    x, w = clenshaw_curtis(2 * (du + dv) + 9, -1.0, 2.0)
    oracle = np.sum(w * np.conj(u(x)) * v(x))
    assert abs(inner(u, v) - oracle) <= 1e-11 * norm_l2(u) * norm_l2(v)


@given(seed=seeds, degs=st.lists(st.integers(0, 20), min_size=2, max_size=4))
def test_piecewise_operations_distribute(seed, degs):
    rng = np.random.default_rng(seed)
    breaks = np.linspace(-1, 1, len(degs) + 1)
    u = random_piecewise(rng, degs, breaks)
    v = random_piecewise(rng, degs[::-1], breaks)
    oracle = gauss_legendre_rows([u, v])
    assert abs(inner(u, v) - np.vdot(oracle[:, 0], oracle[:, 1])) <= 1e-12 * norm_l2(u) * norm_l2(v)
    # derivative and product act piece by piece
    for p in range(len(degs)):
        a, b = breaks[p], breaks[p + 1]
        up = ChebFun([a, b], [u.coeffs[p]])
        vp = ChebFun([a, b], [v.coeffs[p]])
        x = np.linspace(a, b, 7)[1:-1]
        np.testing.assert_allclose(derivative(u)(x), derivative(up)(x), rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose((u * v)(x), (up * vp)(x), rtol=1e-12, atol=1e-12)


def test_from_coeffs_round_trip():
    c = np.array([1.0, -2.0, 0.5j])
    np.testing.assert_array_equal(from_coeffs(c).coeffs[0], c)
