import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from snapvar import linalg
from conftest import random_hermitian, random_unitary


def test_matmul_examples(rng):
    i2 = np.eye(2)
    z = np.diag([1.0, -1.0])
    assert np.array_equal(linalg.matmul(i2, i2), i2)
    assert np.array_equal(linalg.matmul(z, z), i2)
    u = random_unitary(rng, 4)
    assert linalg.frobenius_distance(linalg.matmul(u, linalg.adjoint(u)), np.eye(4)) < 1e-10


def test_matmul_dimension_mismatch():
    with pytest.raises(linalg.DimensionError):
        linalg.matmul(np.eye(2), np.eye(3))


def test_adjoint():
    a = np.array([[0, 1j], [0, 0]])
    assert np.array_equal(linalg.adjoint(a), np.array([[0, 0], [-1j, 0]]))
    assert np.array_equal(linalg.adjoint(linalg.adjoint(a)), a)


def test_trace():
    assert linalg.trace(np.eye(5)) == 5
    assert linalg.trace(np.array([[0, 1], [1, 0]])) == 0
    rho = np.zeros((3, 3))
    rho[1, 1] = 1
    assert linalg.trace(rho) == 1


def test_trace_cyclic(rng):
    d = 6
    a, b, c = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)) for _ in range(3))
    assert abs(linalg.trace(a @ b @ c) - linalg.trace(c @ a @ b)) <= 1e-10 * d


def test_frobenius_distance():
    assert linalg.frobenius_distance(np.eye(2), np.eye(2)) == 0
    assert linalg.frobenius_distance(np.eye(2), np.zeros((2, 2))) == pytest.approx(np.sqrt(2))
    assert linalg.frobenius_distance(np.diag([1, -1]), np.eye(2)) == pytest.approx(2)
    with pytest.raises(linalg.DimensionError):
        linalg.frobenius_distance(np.eye(2), np.eye(3))


def test_rejects_nonfinite_and_nonsquare():
    with pytest.raises(ValueError):
        linalg.as_matrix([[np.nan, 0], [0, 1]])
    with pytest.raises(linalg.DimensionError):
        linalg.as_matrix(np.ones((2, 3)))


def test_predicates(rng):
    assert linalg.is_unitary(random_unitary(rng, 4))
    assert not linalg.is_unitary(2 * np.eye(3))
    assert linalg.is_hermitian(random_hermitian(rng, 4))
    assert not linalg.is_hermitian(np.array([[0, 1], [0, 0]]))
    assert linalg.is_diagonal(np.diag([1, 2j]))
    assert not linalg.is_diagonal(np.ones((2, 2)))


def test_eig_examples():
    lam, v = linalg.hermitian_eig(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(lam, [1, 2, 3])
    assert np.allclose(np.abs(v), np.eye(3)[:, [1, 2, 0]])
    lam, _ = linalg.hermitian_eig(np.array([[0, 1], [1, 0]]))
    assert np.allclose(lam, [-1, 1])


def test_eig_rejects_non_hermitian():
    with pytest.raises(linalg.NotHermitianError):
        linalg.hermitian_eig(np.array([[0, 1], [0, 0]]))


@settings(max_examples=60, deadline=None)
@given(d=st.integers(1, 12), seed=st.integers(0, 2**32 - 1))
def test_eig_reconstruction(d, seed):
    h = random_hermitian(np.random.default_rng(seed), d)
    lam, v = linalg.hermitian_eig(h)
    assert np.all(np.diff(lam) >= 0)
    assert linalg.unitarity_error(v) <= 1e-10
    assert linalg.frobenius_distance((v * lam) @ v.conj().T, h) <= 1e-9
    assert np.allclose(lam, np.linalg.eigvalsh(h), atol=1e-9)


def test_eig_degenerate_spectrum(rng):
    u = random_unitary(rng, 5)
    h = (u * np.array([1.0, 1.0, 1.0, -2.0, -2.0])) @ u.conj().T
    lam, v = linalg.hermitian_eig(h)
    assert np.allclose(lam, [-2, -2, 1, 1, 1])
    assert linalg.frobenius_distance((v * lam) @ v.conj().T, h) <= 1e-9


def test_expm_examples():
    assert np.array_equal(linalg.expm_antihermitian(np.zeros((3, 3))), np.eye(3))
    g = np.array([[0, np.pi / 2], [-np.pi / 2, 0]])
    assert linalg.frobenius_distance(linalg.expm_antihermitian(g), [[0, 1], [-1, 0]]) < 1e-10


def test_expm_rejects_non_antihermitian():
    with pytest.raises(linalg.NotHermitianError):
        linalg.expm_antihermitian(np.eye(2))


@settings(max_examples=50, deadline=None)
@given(d=st.integers(1, 10), seed=st.integers(0, 2**32 - 1))
def test_expm_matches_scipy_and_inverts(d, seed):
    g = 1j * random_hermitian(np.random.default_rng(seed), d)
    e = linalg.expm_antihermitian(g)
    assert linalg.unitarity_error(e) <= 1e-10
    assert linalg.frobenius_distance(e, scipy.linalg.expm(g)) <= 1e-9
    assert linalg.frobenius_distance(e @ linalg.expm_antihermitian(-g), np.eye(d)) <= 1e-9


def test_expm_commuting_sum(rng):
    u = random_unitary(rng, 6)
    g1 = 1j * (u * rng.standard_normal(6)) @ u.conj().T
    g2 = 1j * (u * rng.standard_normal(6)) @ u.conj().T
    lhs = linalg.expm_antihermitian(g1 + g2)
    rhs = linalg.expm_antihermitian(g1) @ linalg.expm_antihermitian(g2)
    assert linalg.frobenius_distance(lhs, rhs) <= 1e-9
