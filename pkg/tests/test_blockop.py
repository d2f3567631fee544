import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import clenshaw_curtis, gauss_legendre_rows, l2_oracle_gram, random_chebfun
from quasispec.blockop import BlockQuasimatrix, FunVec, block2x2_svd, split_left
from quasispec.errors import ShapeError
from quasispec.funcore import chebpoly, constant, norm_l2
from quasispec.quasimatrix import Quasimatrix, hcat_svd, zeros

seeds = st.integers(0, 2**32 - 1)


def random_block(rng, n, d, degree=20, domain=(-1.0, 1.0)):
    top = Quasimatrix([random_chebfun(rng, int(rng.integers(0, degree + 1)), domain) for _ in range(n)])
    bottom = rng.standard_normal((d, n)) + 1j * rng.standard_normal((d, n))
    return BlockQuasimatrix(top, bottom)


def block_gram_oracle(M: BlockQuasimatrix) -> np.ndarray:
    return l2_oracle_gram(list(M.top)) + M.bottom.conj().T @ M.bottom


def funvec_dist(x: FunVec, y: FunVec) -> float:
    return (x - y).norm()


# -- FunVec -----------------------------------------------------------------------

def test_funvec_norm_and_weights():
    w = FunVec(chebpoly(0), [1.0])
    assert w.norm() == pytest.approx(math.sqrt(3))
    assert w.norm(alpha=2.0, beta=3.0) == pytest.approx(math.sqrt(2 * 2 + 3 * 1))


@given(seed=seeds, d=st.integers(0, 4), a=st.complex_numbers(max_magnitude=10))
def test_funvec_inner_sesquilinear_positive(seed, d, a):
    rng = np.random.default_rng(seed)
    def rand():
        return FunVec(random_chebfun(rng, 8), rng.standard_normal(d) + 1j * rng.standard_normal(d))
    u, v, w = rand(), rand(), rand()
    lhs = u.inner(v.scale(a) + w)
    assert abs(lhs - (a * u.inner(v) + u.inner(w))) <= 1e-12 * (1 + abs(a)) * u.norm() * (v.norm() + w.norm())
    assert abs(u.scale(a).inner(v) - np.conj(a) * u.inner(v)) <= 1e-12 * (1 + abs(a)) * u.norm() * v.norm()
    assert abs(u.inner(v) - np.conj(v.inner(u))) <= 1e-13 * u.norm() * v.norm()
    uu = u.inner(u)
    assert abs(uu.imag) <= 1e-13 * uu.real and uu.real > 0


# -- apply / adjoint ------------------------------------------------------------

def test_apply_degenerate_cases(rng):
    M = random_block(rng, 3, 0)
    c = np.array([1.0, -2.0, 0.5j])
    assert M.d == 0
    assert norm_l2(M.apply(c).fun - M.top.apply(c)) == 0
    Bm = rng.standard_normal((2, 3))
    Z = BlockQuasimatrix(zeros((-1.0, 1.0), 3), Bm)
    w = Z.apply(c)
    assert norm_l2(w.fun) == 0
    np.testing.assert_allclose(w.tail, Bm @ c)
    M = random_block(rng, 3, 2)
    e1 = M.apply([0, 1, 0])
    assert funvec_dist(e1, M.column(1)) == 0
    with pytest.raises(ShapeError):
        M.apply([1, 2])


def test_adjoint_apply_reductions(rng):
    Bm = rng.standard_normal((2, 3))
    Z = BlockQuasimatrix(zeros((-1.0, 1.0), 3), Bm)
    t = np.array([1.0, 2.0j])
    np.testing.assert_allclose(Z.adjoint_apply(FunVec(constant(0.0), t)), Bm.conj().T @ t)
    M = random_block(rng, 3, 2)
    f = random_chebfun(rng, 7)
    np.testing.assert_allclose(M.adjoint_apply(FunVec(f, np.zeros(2))), M.top.adjoint_apply(f), atol=1e-14)
    Q, _ = M.qr()
    c = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    np.testing.assert_allclose(Q.adjoint_apply(Q.apply(c)), c, atol=1e-10)
    with pytest.raises(ShapeError):
        M.adjoint_apply(FunVec(f, np.zeros(1)))


# -- QR ---------------------------------------------------------------------------

def test_qr_examples(rng):
    _, R = BlockQuasimatrix(Quasimatrix([chebpoly(0)]), [[1.0]]).qr()
    np.testing.assert_allclose(R, [[math.sqrt(3)]])
    top = Quasimatrix([random_chebfun(rng, 9) for _ in range(4)])
    _, R0 = BlockQuasimatrix(top).qr()
    _, R1 = top.qr()
    np.testing.assert_allclose(np.abs(R0), np.abs(R1), atol=1e-12)
    Bm = rng.standard_normal((5, 3))
    _, Rz = BlockQuasimatrix(zeros((-1.0, 1.0), 3), Bm).qr()
    np.testing.assert_allclose(np.abs(Rz), np.abs(np.linalg.qr(Bm)[1]), atol=1e-12)


@given(seed=seeds, n=st.integers(1, 12), d=st.integers(0, 5), degree=st.integers(0, 40))
def test_qr_properties(seed, n, d, degree):
    rng = np.random.default_rng(seed)
    M = random_block(rng, n, d, degree)
    Q, R = M.qr()
    assert np.max(np.abs(block_gram_oracle(Q) - np.eye(n))) <= 1e-10
    rebuilt = Q @ R
    for j in range(n):
        assert funvec_dist(rebuilt.column(j), M.column(j)) <= 1e-10 * M.column(j).norm()
    assert np.allclose(np.tril(R, -1), 0)


# -- SVD --------------------------------------------------------------------------

@given(seed=seeds, n=st.integers(1, 10), d=st.integers(0, 5))
def test_svd_properties(seed, n, d):
    rng = np.random.default_rng(seed)
    M = random_block(rng, n, d)
    f = M.svd()
    assert np.max(np.abs(block_gram_oracle(f.left) - np.eye(n))) <= 1e-10
    rebuilt = f.left @ (np.diag(f.sigmas) @ f.right.conj().T)
    err = math.sqrt(sum(funvec_dist(rebuilt.column(j), M.column(j)) ** 2 for j in range(n)))
    assert err <= 1e-10 * M.normF()
    oracle = np.sqrt(np.maximum(np.linalg.eigvalsh(block_gram_oracle(M))[::-1], 0))
    np.testing.assert_allclose(f.sigmas, oracle, atol=1e-9 * f.sigmas[0])


def test_svd_degenerate_cases(rng):
    top = Quasimatrix([random_chebfun(rng, 6) for _ in range(3)])
    np.testing.assert_allclose(BlockQuasimatrix(top).svd().sigmas, top.svd().sigmas, rtol=1e-13)
    Bm = rng.standard_normal((4, 3))
    s = BlockQuasimatrix(zeros((-1.0, 1.0), 3), Bm).svd().sigmas
    np.testing.assert_allclose(s, np.linalg.svd(Bm, compute_uv=False), rtol=1e-13)


# -- 2x2 block SVD ----------------------------------------------------------------

def test_block2x2_reduces_to_hcat(rng):
    A = Quasimatrix([random_chebfun(rng, 9) for _ in range(3)])
    B = Quasimatrix([random_chebfun(rng, 9) for _ in range(3)])
    Z = np.zeros((2, 3))
    f = block2x2_svd(A, B, Z, Z)
    np.testing.assert_allclose(f.sigmas, hcat_svd(A, B).sigmas, rtol=1e-12)
    assert np.max(np.abs(f.left.bottom)) <= 1e-14


def test_block2x2_exact_rank(rng):
    A = Quasimatrix([random_chebfun(rng, 9) for _ in range(3)])
    C = rng.standard_normal((2, 3))
    s = block2x2_svd(A, A, C, C).sigmas
    np.testing.assert_allclose(s[3:], 0, atol=1e-13 * s[0])


@given(seed=seeds, n=st.integers(1, 6), d=st.integers(0, 3))
def test_block2x2_clenshaw_curtis_oracle(seed, n, d):
    rng = np.random.default_rng(seed)
    dom = (0.0, 2.0)
    A = Quasimatrix([random_chebfun(rng, 25, dom) for _ in range(n)])
    B = Quasimatrix([random_chebfun(rng, 25, dom) for _ in range(n)])
    C = rng.standard_normal((d, n))
    D = rng.standard_normal((d, n))
    x, w = clenshaw_curtis(2000, *dom)
    sw = np.sqrt(w)[:, None]
    top = np.hstack([sw * np.column_stack([a(x) for a in A]), sw * np.column_stack([b(x) for b in B])])
    dense = np.vstack([top, np.hstack([C, D])])
    f = block2x2_svd(A, B, C, D)
    np.testing.assert_allclose(f.sigmas, np.linalg.svd(dense, compute_uv=False), atol=1e-10 * f.sigmas[0])
    assert np.max(np.abs(block_gram_oracle(f.left) - np.eye(2 * n))) <= 1e-9
    U1, U2 = split_left(f, n)
    assert U1.n == n and (U2 is None or U2.n == n)


def test_block2x2_shape_errors(rng):
    A = Quasimatrix([random_chebfun(rng, 3) for _ in range(2)])
    with pytest.raises(ShapeError):
        block2x2_svd(A, A, np.zeros((1, 2)), np.zeros((2, 2)))
    with pytest.raises(ShapeError):
        block2x2_svd(A, A[:1], np.zeros((1, 2)), np.zeros((1, 1)))


# -- row weights ------------------------------------------------------------------

def test_scale_rows(rng):
    M = random_block(rng, 3, 2)
    assert M.scale_rows(1.0, 1.0) is M
    c = rng.standard_normal(3)
    a, b = 2.5, 40.0
    before = M.apply(c).norm(alpha=a, beta=b)
    after = M.scale_rows(a, b).apply(c).norm()
    assert abs(before - after) <= 1e-12 * before
    w0 = np.linalg.norm(M.scale_rows(1.0, 1e4).bottom)
    assert w0 == pytest.approx(100 * np.linalg.norm(M.bottom))
    with pytest.raises(ValueError):
        M.scale_rows(0.0, 1.0)


@given(seed=seeds, n=st.integers(1, 6), d=st.integers(0, 3))
def test_interlacing(seed, n, d):
    # appending n columns: sigma_i([B A]) >= sigma_i(B) >= sigma_{i+n}([B A])
    rng = np.random.default_rng(seed)
    A, B = random_block(rng, n, d), random_block(rng, n, d)
    s = B.hcat(A).singular_values()
    sB = B.singular_values()
    slack = 1e-10 * s[0]
    s = np.concatenate([s, np.zeros(2 * n - s.size)])
    for i in range(n):
        assert s[i] + slack >= sB[i] >= s[i + n] - slack


@given(seed=seeds, n=st.integers(1, 6), d=st.integers(0, 3), noise=st.floats(0, 1e-3))
def test_gap_for_nearly_consistent_pencils(seed, n, d, noise):
    rng = np.random.default_rng(seed)
    B = random_block(rng, n, d)
    Z = rng.standard_normal((n, n))
    A = B @ Z + random_block(rng, n, d).scale(noise)
    s = B.hcat(A).singular_values()
    sB = B.singular_values()
    slack = 1e-10 * s[0]
    assert s[n - 1] + slack >= sB[n - 1] >= s[n] - slack


def test_gauss_rows_helper_matches_block_gram(rng):
    M = random_block(rng, 3, 1)
    V = gauss_legendre_rows(list(M.top))
    np.testing.assert_allclose(M.gram(), V.conj().T @ V + M.bottom.conj().T @ M.bottom, atol=1e-12)
