import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from snapvar import gates, linalg
from snapvar.gates import AnsatzParams, BlockParams


def _block(rng, d, alpha=None):
    a = rng.uniform(0, 2 * np.pi) if alpha is None else alpha
    return BlockParams(a, rng.uniform(0, 2 * np.pi, d))


def _ansatz(rng, d, t):
    return AnsatzParams(tuple(_block(rng, d) for _ in range(t)))


def test_ladder_operators():
    assert np.array_equal(gates.lowering(1), [[0]])
    assert np.array_equal(gates.lowering(2), [[0, 1], [0, 0]])
    a3 = gates.lowering(3)
    assert a3[0, 1] == 1 and a3[1, 2] == pytest.approx(np.sqrt(2))
    assert np.array_equal(gates.raising(2), [[0, 0], [1, 0]])
    assert gates.raising(3)[2, 1] == pytest.approx(np.sqrt(2))
    for d in range(1, 8):
        assert np.array_equal(gates.raising(d), linalg.adjoint(gates.lowering(d)))


def test_displacement_examples():
    for d in (1, 3, 7):
        assert np.array_equal(gates.displacement(0.0, d), np.eye(d))
    d2 = gates.displacement(np.pi / 2, 2)
    assert linalg.frobenius_distance(d2, [[0, 1], [-1, 0]]) < 1e-10


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(-10, 10), d=st.integers(1, 12))
def test_displacement_inverse_and_unitary(alpha, d):
    dd = gates.displacement(alpha, d)
    assert linalg.unitarity_error(dd) <= 1e-10
    assert linalg.frobenius_distance(dd @ gates.displacement(-alpha, d), np.eye(d)) <= 1e-9


def test_displacement_matches_generator_exponential():
    d = 6
    g = 0.7 * (gates.lowering(d) - gates.raising(d))
    assert linalg.frobenius_distance(gates.displacement(0.7, d), linalg.expm_antihermitian(g)) < 1e-10


def test_displacement_rejects_nonfinite():
    with pytest.raises(ValueError):
        gates.displacement(np.inf, 3)


def test_snap_examples(rng):
    assert np.array_equal(gates.snap([0, 0, 0]), np.eye(3))
    assert np.allclose(gates.snap([0, np.pi]), np.diag([1, -1]))
    th = rng.uniform(0, 6, 5)
    assert np.allclose(gates.snap(th) @ gates.snap(-th), np.eye(5))


def test_block_examples(rng):
    assert linalg.frobenius_distance(gates.block(BlockParams(1.3, [0.0] * 4)), np.eye(4)) <= 1e-9
    th = rng.uniform(0, 6, 4)
    assert np.allclose(gates.block(BlockParams(0.0, th)), gates.snap(th))


def test_block_spectrum_is_snap_phases(rng):
    for d in (2, 5, 8):
        p = _block(rng, d)
        b = gates.block(p)
        # power sums tr(B^m), m = 1..d, fix the eigenvalue multiset
        phases = np.exp(1j * np.asarray(p.thetas))
        bm = np.eye(d)
        for m in range(1, d + 1):
            bm = bm @ b
            assert abs(np.trace(bm) - np.sum(phases**m)) < 1e-8


def test_ansatz(rng):
    p = _ansatz(rng, 4, 1)
    assert np.allclose(gates.ansatz(p), gates.block(p.blocks[0]))
    ident = AnsatzParams(tuple(BlockParams(rng.uniform(), [0.0] * 4) for _ in range(3)))
    assert linalg.frobenius_distance(gates.ansatz(ident), np.eye(4)) <= 1e-9
    p2 = _ansatz(rng, 4, 2)
    expect = gates.block(p2.blocks[1]) @ gates.block(p2.blocks[0])
    assert np.allclose(gates.ansatz(p2), expect)


def test_ansatz_params_validation():
    with pytest.raises(ValueError):
        AnsatzParams(())
    with pytest.raises(ValueError):
        AnsatzParams((BlockParams(0, [0, 0]), BlockParams(0, [0, 0, 0])))
    with pytest.raises(ValueError):
        BlockParams(np.nan, [0.0])


def test_partition_examples(rng):
    p = _block(rng, 4)
    dd = gates.displacement(p.alpha, 4)
    part = gates.partition_block(p, 3)
    assert np.allclose(part.w_a, dd.conj().T @ gates.snap(p.thetas))
    assert np.allclose(part.w_b, dd)
    th = rng.uniform(0, 6, 3)
    part = gates.partition_block(BlockParams(0.0, th), 0)
    assert np.allclose(part.w_a, np.diag(np.exp(1j * np.array([th[0], 0, 0]))))
    assert np.allclose(part.w_b, np.diag(np.exp(1j * np.array([0, th[1], th[2]]))))


def test_partition_reconstruction(rng):
    for d in (2, 4, 7):
        p = _block(rng, d)
        for nu in range(d):
            part = gates.partition_block(p, nu)
            assert linalg.frobenius_distance(part.w_a @ part.w_b, gates.block(p)) <= 1e-9
    with pytest.raises(IndexError):
        gates.partition_block(_block(rng, 3), 3)


def test_split_ansatz(rng):
    p = _ansatz(rng, 3, 1)
    u_r, b, u_l = gates.split_ansatz(p, 1)
    assert np.array_equal(u_r, np.eye(3)) and np.array_equal(u_l, np.eye(3))
    assert b == p.blocks[0]
    p = _ansatz(rng, 5, 4)
    u_r, _, _ = gates.split_ansatz(p, 4)
    assert np.array_equal(u_r, np.eye(5))
    u_r, b, u_l = gates.split_ansatz(p, 2)
    assert linalg.frobenius_distance(u_r @ gates.block(b) @ u_l, gates.ansatz(p)) <= 1e-9
    with pytest.raises(IndexError):
        gates.split_ansatz(p, 5)


def test_block_gradient(rng):
    g = gates.block_gradient(BlockParams(0.0, [0.0, 0.0]), 0)
    assert np.allclose(g, 1j * np.diag([1, 0]))
    h = 1e-5
    for d in (2, 5):
        p = _block(rng, d)
        for nu in range(d):
            g = gates.block_gradient(p, nu)
            assert np.linalg.norm(g) == pytest.approx(1.0, abs=1e-12)
            th = np.array(p.thetas)
            tp, tm = th.copy(), th.copy()
            tp[nu] += h
            tm[nu] -= h
            fd = (gates.block(BlockParams(p.alpha, tp)) - gates.block(BlockParams(p.alpha, tm))) / (2 * h)
            assert np.max(np.abs(fd - g)) <= 1e-9


def test_with_theta(rng):
    p = _ansatz(rng, 3, 2)
    q = p.with_theta(2, 1, 0.5)
    assert q.blocks[1].thetas[1] == 0.5 and q.blocks[0] == p.blocks[0]
    assert np.array_equal(AnsatzParams.from_arrays(p.alphas(), p.theta_array()).theta_array(), p.theta_array())
