import numpy as np
import pytest

from snapvar import cost, gates, kernels
from snapvar.cost import GateCost, GradientRequest, StateCost
from snapvar.gates import AnsatzParams
from conftest import random_hermitian, random_unitary

BACKENDS = sorted(kernels.BACKENDS)


def test_backend_selected():
    assert kernels.BACKEND in kernels.BACKENDS


def test_compiled_backend_available():
    # the package is built with the extension in this repository's setup
    assert "cython" in kernels.BACKENDS


@pytest.mark.parametrize("name", BACKENDS)
def test_jacobi(name, rng):
    impl = kernels.BACKENDS[name]
    for d in (1, 2, 5, 9):
        h = random_hermitian(rng, d)
        lam, v = impl.jacobi_eigh(h, 1e-12, 100)
        assert np.linalg.norm((v * lam) @ v.conj().T - h) <= 1e-9
        assert np.allclose(np.sort(lam), np.linalg.eigvalsh(h), atol=1e-9)


@pytest.mark.parametrize("name", BACKENDS)
def test_jacobi_non_convergence(name, rng):
    h = random_hermitian(rng, 6)
    with pytest.raises(kernels.ConvergenceError):
        kernels.BACKENDS[name].jacobi_eigh(h, 1e-30, 1)


def _batch(rng, n, t, d):
    return rng.uniform(0, 2 * np.pi, (n, t)), rng.uniform(0, 2 * np.pi, (n, t, d))


@pytest.mark.parametrize("name", BACKENDS)
@pytest.mark.parametrize("d,t", [(2, 1), (3, 4), (6, 5)])
def test_state_kernel_matches_reference(name, d, t, rng):
    impl = kernels.BACKENDS[name]
    alphas, thetas = _batch(rng, 12, t, d)
    w = rng.dirichlet(np.ones(d))
    u = random_unitary(rng, d)
    spec = StateCost(random_hermitian(rng, d), rho0=(u * w) @ u.conj().T)
    vecs, weights = spec.pure_components()
    lam, v = gates.displacement_basis(d)
    for k in {1, t}:
        for nu in {0, d - 1}:
            got = impl.state_grads(v, lam, alphas, thetas, k, nu, spec.observable, vecs, weights)
            ref = [
                cost.grad_state_cost(spec, AnsatzParams.from_arrays(alphas[i], thetas[i]), GradientRequest(k, nu))
                for i in range(len(alphas))
            ]
            assert np.max(np.abs(got - ref)) <= 1e-12


@pytest.mark.parametrize("name", BACKENDS)
@pytest.mark.parametrize("d,t", [(2, 1), (3, 4), (6, 5)])
def test_gate_kernel_matches_reference(name, d, t, rng):
    impl = kernels.BACKENDS[name]
    alphas, thetas = _batch(rng, 12, t, d)
    spec = GateCost(random_unitary(rng, d))
    lam, v = gates.displacement_basis(d)
    for k in {1, t}:
        for nu in {0, d - 1}:
            got = impl.gate_grads(v, lam, alphas, thetas, k, nu, spec.target)
            ref = [
                cost.grad_gate_cost(spec, AnsatzParams.from_arrays(alphas[i], thetas[i]), GradientRequest(k, nu))
                for i in range(len(alphas))
            ]
            assert np.max(np.abs(got - ref)) <= 1e-12


def test_backends_agree(rng):
    if len(BACKENDS) < 2:
        pytest.skip("only one backend built")
    d, t = 7, 6
    alphas, thetas = _batch(rng, 200, t, d)
    lam, v = gates.displacement_basis(d)
    o = random_hermitian(rng, d)
    psi = np.eye(d, dtype=complex)[:1]
    a = kernels.BACKENDS["cython"].state_grads(v, lam, alphas, thetas, 3, 1, o, psi, np.ones(1))
    b = kernels.BACKENDS["python"].state_grads(v, lam, alphas, thetas, 3, 1, o, psi, np.ones(1))
    assert np.max(np.abs(a - b)) <= 1e-12
    tgt = random_unitary(rng, d)
    a = kernels.BACKENDS["cython"].gate_grads(v, lam, alphas, thetas, 3, 1, tgt)
    b = kernels.BACKENDS["python"].gate_grads(v, lam, alphas, thetas, 3, 1, tgt)
    assert np.max(np.abs(a - b)) <= 1e-12


def test_pure_python_switch():
    import subprocess
    import sys

    code = "from snapvar import kernels; print(kernels.BACKEND)"
    out = subprocess.run(
        [sys.executable, "-c", code],
        env={**__import__("os").environ, "SNAPVAR_PURE_PYTHON": "1"},
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "python"
