import numpy as np
import pytest

from pid_certify.errors import DimensionError
from pid_certify.matnum import (
    DEFINITENESS_BAND,
    as_square,
    definiteness_margin,
    eig_extremes,
    is_positive_definite,
    jacobi_eigenvalues,
    kron3_with_identity,
    spectral_norm,
    sym_part,
)


def test_sym_part_is_exactly_symmetric_and_frozen():
    rng = np.random.default_rng(1)
    S = sym_part(rng.standard_normal((5, 5)))
    assert np.array_equal(S.entries, S.entries.T)
    with pytest.raises(ValueError):
        S.entries[0, 1] = 3.0


@pytest.mark.parametrize("n", [1, 2, 3, 6, 9])
def test_jacobi_matches_lapack(n):
    rng = np.random.default_rng(n)
    S = sym_part(rng.standard_normal((n, n)))
    expected = np.linalg.eigvalsh(S.entries)
    assert np.allclose(jacobi_eigenvalues(S), expected, atol=1e-10)


def test_jacobi_zero_and_diagonal():
    assert np.array_equal(jacobi_eigenvalues(sym_part(np.zeros((3, 3)))), np.zeros(3))
    lo, hi = eig_extremes(sym_part(np.diag([3.0, -1.0, 2.0])))
    assert (lo, hi) == (-1.0, 3.0)


def test_spectral_norm_matches_numpy():
    rng = np.random.default_rng(7)
    M = rng.standard_normal((4, 4))
    assert spectral_norm(M) == pytest.approx(np.linalg.norm(M, 2), rel=1e-10)


def test_positive_definiteness():
    assert is_positive_definite(sym_part(np.eye(3)))
    assert not is_positive_definite(sym_part(np.diag([1.0, -1.0])))
    assert not is_positive_definite(sym_part(np.diag([1.0, 0.0])))
    assert definiteness_margin(sym_part(np.diag([2.0, 0.5]))) == pytest.approx(0.5)


def test_kron3_block_structure():
    C = np.array([[1.0, 2.0, 0.0], [2.0, 5.0, 1.0], [0.0, 1.0, 1.0]])
    K = kron3_with_identity(C, 2).entries
    assert K.shape == (6, 6)
    assert np.array_equal(K[0:2, 2:4], 2.0 * np.eye(2))
    assert np.array_equal(K[4:6, 4:6], np.eye(2))
    assert np.array_equal(K[0:2, 4:6], np.zeros((2, 2)))


def test_kron3_rejects_bad_shapes():
    with pytest.raises(DimensionError):
        kron3_with_identity(np.eye(3), 0)
    with pytest.raises(DimensionError):
        kron3_with_identity(np.eye(2), 2)


def test_as_square_rejects_rectangular():
    with pytest.raises(DimensionError):
        as_square(np.ones((2, 3)))


def random_symmetric(rng, n, low=-1.0, high=1.0):
    """Q diag(lam) Q^T with known eigenvalues lam"""
    Q = np.linalg.qr(rng.standard_normal((n, n)))[0]
    lam = rng.uniform(low, high, n)
    return sym_part(Q @ np.diag(lam) @ Q.T), np.sort(lam)


def test_documented_examples():
    assert np.array_equal(
        sym_part([[1.0, 4.0], [2.0, 3.0]]).entries, [[1.0, 3.0], [3.0, 3.0]]
    )
    assert np.array_equal(sym_part([[0.0, 2.0], [0.0, 0.0]]).entries, [[0, 1], [1, 0]])
    lo, hi = eig_extremes(sym_part([[2.0, 1.0], [1.0, 2.0]]))
    assert lo == pytest.approx(1.0, rel=1e-12)
    assert hi == pytest.approx(3.0, rel=1e-12)
    assert spectral_norm(np.diag([3.0, -4.0])) == pytest.approx(4.0, rel=1e-12)
    assert spectral_norm([[0.0, 2.0], [0.0, 0.0]]) == pytest.approx(2.0, rel=1e-12)


def test_rayleigh_quotient_lies_between_extreme_eigenvalues():
    rng = np.random.default_rng(21)
    for _ in range(100):
        n = int(rng.integers(1, 13))
        S, _ = random_symmetric(rng, n, -3.0, 3.0)
        lo, hi = eig_extremes(S)
        tol = 1e-12 * max(abs(lo), abs(hi), 1.0)
        for _ in range(10):
            x = rng.standard_normal(n)
            x /= np.linalg.norm(x)
            assert lo - tol <= S.quadratic_form(x) <= hi + tol


def test_positive_definiteness_matches_min_eigenvalue():
    rng = np.random.default_rng(22)
    checked = 0
    for _ in range(1000):
        n = int(rng.integers(1, 13))
        S, lam = random_symmetric(rng, n, -0.2, 2.0)
        lo, hi = eig_extremes(S)
        assert lo == pytest.approx(lam[0], abs=1e-10)
        assert hi == pytest.approx(lam[-1], abs=1e-10)
        if abs(lo) <= DEFINITENESS_BAND * max(abs(hi), 1.0):
            continue
        assert is_positive_definite(S) == (lo > 0)
        checked += 1
    assert checked > 990


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_kron3_keeps_the_spectrum_of_the_core(n):
    rng = np.random.default_rng(30 + n)
    C, lam = random_symmetric(rng, 3, -2.0, 2.0)
    K = kron3_with_identity(C.entries, n)
    assert K.order == 3 * n
    assert eig_extremes(K)[0] == pytest.approx(eig_extremes(C)[0], abs=1e-12)
    assert np.allclose(jacobi_eigenvalues(K), np.repeat(lam, n), atol=1e-12)


def test_spectral_norm_bounds_every_sampled_gain():
    rng = np.random.default_rng(23)
    for _ in range(200):
        n = int(rng.integers(1, 13))
        M = rng.standard_normal((n, n))
        norm = spectral_norm(M)
        x = rng.standard_normal((5, n))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        sampled = np.linalg.norm(x @ M.T, axis=1).max()
        assert sampled <= norm * (1 + 1e-12)
        assert norm == pytest.approx(np.linalg.norm(M, 2), rel=1e-10)
