import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_chebfun
from quasispec.blockop import BlockQuasimatrix
from quasispec.errors import IllPosedTLSError, ShapeError
from quasispec.funcore import norm_l2
from quasispec.lssolvers.problems import CHEB_LEGENDRE_EIGENVALUES, cheb_legendre_pencil
from quasispec.quasimatrix import Quasimatrix
from quasispec.rectgep import dense_gep, itomurota_block, itomurota_discrete, min_perturbation, sort_order

seeds = st.integers(0, 2**32 - 1)


def cplx(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# -- dense_gep ----------------------------------------------------------------------

def test_dense_gep_examples(rng):
    lam, _ = dense_gep(np.diag([1.0, 2.0, 3.0]), np.eye(3))
    np.testing.assert_allclose(lam, [3, 2, 1])
    S = cplx(rng, 4, 4)
    lam, _ = dense_gep(S, S)
    np.testing.assert_allclose(lam, 1, atol=1e-12)
    S, T = cplx(rng, 5, 5), cplx(rng, 5, 5)
    lam, X = dense_gep(S, T)
    for k in range(5):
        r = np.linalg.norm(S @ X[:, k] - lam[k] * T @ X[:, k])
        assert r <= 1e-12 * (np.linalg.norm(S, 2) + abs(lam[k]) * np.linalg.norm(T, 2))
        assert np.linalg.norm(X[:, k]) == pytest.approx(1.0)


def test_dense_gep_infinite_eigenvalue():
    lam, _ = dense_gep(np.diag([1.0, 2.0]), np.diag([1.0, 0.0]))
    assert lam[0] == 1 and np.isinf(lam[1])


def test_dense_gep_shape_error():
    with pytest.raises(ShapeError):
        dense_gep(np.eye(2), np.eye(3))


def test_sort_order_is_deterministic():
    lam = np.array([1 + 1j, 2, 1 - 1j, np.inf, 3j])
    np.testing.assert_array_equal(lam[sort_order(lam)], [2, 1 + 1j, 1 - 1j, 3j, np.inf])


# -- discrete Ito-Murota --------------------------------------------------------------

def test_discrete_square_reduces_to_eig(rng):
    A = cplx(rng, 4, 4)
    out = itomurota_discrete(A, np.eye(4))
    np.testing.assert_allclose(np.sort_complex(out.lambdas), np.sort_complex(np.linalg.eigvals(A)), atol=1e-12)
    assert out.pert_norm <= 1e-12 * np.linalg.norm(A)


def test_discrete_consistent_tall():
    A = np.array([[1, 0], [0, 2], [0, 0]], float)
    B = np.array([[1, 0], [0, 1], [0, 0]], float)
    out = itomurota_discrete(A, B)
    np.testing.assert_allclose(out.lambdas, [2, 1], atol=1e-14)
    assert out.pert_norm <= 1e-14


def test_discrete_needs_tall():
    with pytest.raises(ShapeError):
        itomurota_discrete(np.ones((2, 3)), np.ones((2, 3)))


@given(seed=seeds)
def test_discrete_perturbation_construction(seed):
    rng = np.random.default_rng(seed)
    A, B = cplx(rng, 6, 3), cplx(rng, 6, 3)
    out = itomurota_discrete(A, B)
    try:
        Ah, Bh = min_perturbation(A, B)
    except IllPosedTLSError:
        return
    dist = math.sqrt(np.linalg.norm(Ah - A) ** 2 + np.linalg.norm(Bh - B) ** 2)
    assert abs(dist - out.pert_norm) <= 1e-10 * np.linalg.norm(np.hstack([A, B]))
    X, lam = out.X, out.lambdas
    res = Ah @ X - Bh @ X * lam[None, :]
    scale = np.linalg.norm(Ah, 2) + np.max(np.abs(lam)) * np.linalg.norm(Bh, 2)
    assert np.linalg.norm(res) <= 1e-10 * scale


@given(seed=seeds, c=st.floats(1e-3, 1e3))
def test_scale_covariance(seed, c):
    rng = np.random.default_rng(seed)
    A, B = cplx(rng, 7, 3), cplx(rng, 7, 3)
    l1 = itomurota_discrete(A, B).lambdas
    l2 = itomurota_discrete(c * A, c * B).lambdas
    np.testing.assert_allclose(l2, l1, rtol=1e-10, atol=1e-10 * np.max(np.abs(l1)))


def test_pert_norm_is_trailing_sigmas(rng):
    A, B = cplx(rng, 8, 3), cplx(rng, 8, 3)
    out = itomurota_discrete(A, B)
    s = np.linalg.svd(np.hstack([A, B]), compute_uv=False)
    assert abs(out.pert_norm - math.sqrt(np.sum(s[3:] ** 2))) <= 1e-12 * s[0]


# -- block Ito-Murota ---------------------------------------------------------------

def test_cheb_legendre_pencil():
    A, B = cheb_legendre_pencil()
    out = itomurota_block(A, B)
    np.testing.assert_allclose(np.sort(out.lambdas.real), sorted(CHEB_LEGENDRE_EIGENVALUES), atol=1e-10)
    np.testing.assert_allclose(out.lambdas.imag, 0, atol=1e-10)
    k = int(np.argmin(np.abs(out.lambdas - 4 / 3)))
    x = out.X[:, k]
    target = np.array([-1, 0, 1, 0, 0, 0]) / math.sqrt(2)
    x = x * (np.vdot(x, target) / abs(np.vdot(x, target)))  # fix the phase against the target
    np.testing.assert_allclose(x, target, atol=1e-8)
    assert out.pert_norm <= 1e-10


def test_identical_pencil(rng):
    A = Quasimatrix([random_chebfun(rng, 11) for _ in range(4)])
    out = itomurota_block(A, A)
    np.testing.assert_allclose(out.lambdas, 1, atol=1e-10)
    assert out.pert_norm <= 1e-10


def test_block_shape_mismatch(rng):
    A = BlockQuasimatrix(Quasimatrix([random_chebfun(rng, 3) for _ in range(2)]), np.ones((1, 2)))
    B = BlockQuasimatrix(A.top)
    with pytest.raises(ShapeError):
        itomurota_block(A, B)


def random_block_pencil(rng, n, d, degree=15):
    def one():
        top = Quasimatrix([random_chebfun(rng, degree) for _ in range(n)])
        return BlockQuasimatrix(top, cplx(rng, d, n))
    return one(), one()


@given(seed=seeds, n=st.integers(1, 6), d=st.integers(0, 3))
def test_projected_residual_orthogonality(seed, n, d):
    rng = np.random.default_rng(seed)
    A, B = random_block_pencil(rng, n, d)
    out = itomurota_block(A, B)
    UA, UB = out.U1.adjoint_matmul(A), out.U1.adjoint_matmul(B)
    for k in range(n):
        if not np.isfinite(out.lambdas[k]):
            continue
        x = out.X[:, k]
        r = UA @ x - out.lambdas[k] * (UB @ x)
        assert np.linalg.norm(r) <= 1e-9 * A.apply(x).norm()


@given(seed=seeds, n=st.integers(1, 5))
def test_block_matches_discrete_on_grid(seed, n):
    # with d = 0 and polynomial columns the block method equals the discrete
    # one applied to Gauss-Legendre samples
    from conftest import gauss_legendre_rows

    rng = np.random.default_rng(seed)
    A, B = random_block_pencil(rng, n, 0)
    V = gauss_legendre_rows(list(A.top) + list(B.top))
    l1 = itomurota_block(A, B).lambdas
    l2 = itomurota_discrete(V[:, :n], V[:, n:]).lambdas
    np.testing.assert_allclose(np.sort_complex(l1), np.sort_complex(l2), rtol=1e-8, atol=1e-8)


# -- minimal perturbation -----------------------------------------------------------

def test_min_perturbation_consistent():
    A, B = cheb_legendre_pencil()
    Ah, Bh = min_perturbation(BlockQuasimatrix(A), BlockQuasimatrix(B))
    assert max(norm_l2(a - b) for a, b in zip(Ah.top, A)) <= 1e-10
    assert max(norm_l2(a - b) for a, b in zip(Bh.top, B)) <= 1e-10


def test_min_perturbation_gap_violation():
    B = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]])
    A = np.array([[0.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(IllPosedTLSError):
        min_perturbation(A, B)


@given(seed=seeds, n=st.integers(1, 4), d=st.integers(0, 2))
def test_min_perturbation_block(seed, n, d):
    rng = np.random.default_rng(seed)
    B = BlockQuasimatrix(Quasimatrix([random_chebfun(rng, 12) for _ in range(n)]), cplx(rng, d, n))
    Z = cplx(rng, n, n)
    noise = 1e-6
    E = BlockQuasimatrix(Quasimatrix([random_chebfun(rng, 20).scale(noise) for _ in range(n)]), noise * cplx(rng, d, n))
    A = B @ Z + E
    Ah, Bh = min_perturbation(A, B)
    s = B.hcat(A).singular_values()
    pert = math.sqrt(np.sum(s[n:] ** 2))
    got = (Ah - A).hcat(Bh - B).normF()
    assert abs(got - pert) <= 1e-12 * s[0]
    # the injected noise bounds the optimal perturbation from above
    assert pert <= E.normF() * (1 + 1e-6)
    sh = Bh.hcat(Ah).singular_values()
    np.testing.assert_array_less(sh[n:], 1e-10 * sh[0])


def _brute_force_rank2(M: np.ndarray) -> float:
    """Smallest ||M - M_2||_F over rank-2 truncations keeping any two SVD triplets."""
    U, s, Vh = np.linalg.svd(M)
    best = math.inf
    for keep in itertools.combinations(range(4), 2):
        Mk = sum(s[i] * np.outer(U[:, i], Vh[i]) for i in keep)
        best = min(best, np.linalg.norm(M - Mk))
    return best


@pytest.mark.parametrize("seed", range(25))
def test_min_perturbation_4x2_brute_force(seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((4, 2))
    A = B @ rng.standard_normal((2, 2)) + 0.05 * rng.standard_normal((4, 2))
    Ah, Bh = min_perturbation(A, B)
    got = math.sqrt(np.linalg.norm(Ah - A) ** 2 + np.linalg.norm(Bh - B) ** 2)
    assert abs(got - _brute_force_rank2(np.hstack([B, A]))) <= 1e-12 * np.linalg.norm(np.hstack([A, B]))
    assert np.linalg.matrix_rank(np.hstack([Bh, Ah]), tol=1e-10) == 2
    # random rank-2 competitors never do better
    for _ in range(200):
        L, R = rng.standard_normal((4, 2)), rng.standard_normal((2, 4))
        assert np.linalg.norm(np.hstack([B, A]) - L @ R) >= got - 1e-12


@pytest.mark.parametrize("seed", range(25))
def test_min_perturbation_random_4x2_gap(seed):
    rng = np.random.default_rng(100 + seed)
    A, B = rng.standard_normal((4, 2)), rng.standard_normal((4, 2))
    s = np.linalg.svd(np.hstack([B, A]), compute_uv=False)
    gap = np.linalg.svd(B, compute_uv=False)[1] - s[2]
    if gap <= 1e-12 * s[0]:
        with pytest.raises(IllPosedTLSError):
            min_perturbation(A, B)
    else:
        Ah, Bh = min_perturbation(A, B)
        got = math.sqrt(np.linalg.norm(Ah - A) ** 2 + np.linalg.norm(Bh - B) ** 2)
        assert abs(got - _brute_force_rank2(np.hstack([B, A]))) <= 1e-12 * s[0]
