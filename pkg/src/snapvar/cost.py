"""State/observable and gate cost functions and their exact SNAP-phase gradients.

Gradients are evaluated through the block partition ``U = U_R W_A W_B U_L``
with ``dB/dtheta_nu = i W_A rho_nu W_B`` and reduced to trace expressions.
The same expressions are reused by the Monte Carlo code with the partition
factors swapped for Haar-random unitaries.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from snapvar import gates, linalg
from snapvar.gates import AnsatzParams


class ImaginaryResidueError(ArithmeticError):
    """A quantity that must be real came out with a non-negligible imaginary part."""


def _real(z: complex, what: str) -> float:
    if abs(z.imag) > linalg.TOL.imag_residue * max(1.0, abs(z.real)):
        raise ImaginaryResidueError(f"{what}: imaginary residue {z.imag:.3e}")
    return float(z.real)


def vacuum(d: int) -> np.ndarray:
    return gates.projector(0, d)


@dataclass(frozen=True)
class StateCost:
    """``C_s = 1 - tr(O U rho0 U^dagger)``; ``rho0`` defaults to ``|0><0|``."""

    observable: np.ndarray
    rho0: np.ndarray | None = field(default=None)

    def __post_init__(self):
        obs = linalg.as_matrix(self.observable)
        if not linalg.is_hermitian(obs):
            raise ValueError("observable must be Hermitian")
        d = obs.shape[0]
        rho = vacuum(d) if self.rho0 is None else linalg.as_matrix(self.rho0)
        if rho.shape != obs.shape:
            raise linalg.DimensionError("rho0 and observable dimensions differ")
        if not linalg.is_hermitian(rho):
            raise ValueError("rho0 must be Hermitian")
        if abs(np.trace(rho) - 1.0) > linalg.TOL.hermitian:
            raise ValueError("rho0 must have unit trace")
        if np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))) < -linalg.TOL.hermitian:
            raise ValueError("rho0 must be positive semidefinite")
        object.__setattr__(self, "observable", obs)
        object.__setattr__(self, "rho0", rho)

    @property
    def dim(self) -> int:
        return self.observable.shape[0]

    def pure_components(self) -> tuple[np.ndarray, np.ndarray]:
        """``(vectors, weights)`` with ``rho0 = sum_r w_r |v_r><v_r|``."""
        w, v = np.linalg.eigh(self.rho0)
        keep = w > 1e-14
        return v[:, keep].T.copy(), w[keep].copy()


@dataclass(frozen=True)
class GateCost:
    """``C_g = 1 - |tr(U_t^dagger U) / d|^2``."""

    target: np.ndarray

    def __post_init__(self):
        tgt = linalg.as_matrix(self.target)
        if not linalg.is_unitary(tgt):
            raise ValueError("target must be unitary")
        object.__setattr__(self, "target", tgt)

    @property
    def dim(self) -> int:
        return self.target.shape[0]


CostSpec = Union[StateCost, GateCost]


@dataclass(frozen=True)
class GradientRequest:
    k: int  # block, 1-based
    nu: int  # phase, 0-based

    def check(self, p: AnsatzParams) -> None:
        if not 1 <= self.k <= p.n_blocks:
            raise IndexError(f"k={self.k} outside 1..{p.n_blocks}")
        if not 0 <= self.nu <= p.dim - 1:
            raise IndexError(f"nu={self.nu} outside 0..{p.dim - 1}")


def _check_dim(spec: CostSpec, p: AnsatzParams) -> None:
    if spec.dim != p.dim:
        raise linalg.DimensionError(f"cost is {spec.dim}-dimensional, ansatz is {p.dim}")


def state_cost_of(spec: StateCost, u: np.ndarray) -> float:
    val = np.trace(spec.observable @ u @ spec.rho0 @ u.conj().T)
    return 1.0 - _real(complex(val), "state cost")


def gate_cost_of(spec: GateCost, u: np.ndarray) -> float:
    d = spec.dim
    overlap = np.trace(spec.target.conj().T @ u) / d
    return float(1.0 - abs(overlap) ** 2)


def state_cost(spec: StateCost, p: AnsatzParams) -> float:
    _check_dim(spec, p)
    return state_cost_of(spec, gates.ansatz(p))


def gate_cost(spec: GateCost, p: AnsatzParams) -> float:
    _check_dim(spec, p)
    return gate_cost_of(spec, gates.ansatz(p))


def cost(spec: CostSpec, p: AnsatzParams) -> float:
    if isinstance(spec, StateCost):
        return state_cost(spec, p)
    return gate_cost(spec, p)


def _factors(p: AnsatzParams, r: GradientRequest):
    r.check(p)
    u_r, b, u_l = gates.split_ansatz(p, r.k)
    part = gates.partition_block(b, r.nu)
    return u_r, part.w_a, part.w_b, u_l


def state_grad_from_factors(observable, rho0, u_r, w_a, w_b, u_l, nu) -> complex:
    """``-i tr(W_A^+ U_R^+ O U_R W_A [rho_nu, W_B U_L rho0 U_L^+ W_B^+])`` (unprojected)."""
    rho_nu = gates.projector(nu, observable.shape[0])
    left = w_a.conj().T @ u_r.conj().T @ observable @ u_r @ w_a
    inner = w_b @ u_l
    right = inner @ rho0 @ inner.conj().T
    comm = rho_nu @ right - right @ rho_nu
    return complex(-1j * np.trace(left @ comm))


def state_grad_from_factors_alt(observable, rho0, u_r, w_a, w_b, u_l, nu) -> complex:
    """The same derivative with the commutator moved onto the observable side."""
    rho_nu = gates.projector(nu, observable.shape[0])
    left = w_a.conj().T @ u_r.conj().T @ observable @ u_r @ w_a
    inner = w_b @ u_l
    right = inner @ rho0 @ inner.conj().T
    comm = left @ rho_nu - rho_nu @ left
    return complex(-1j * np.trace(comm @ right))


def gate_grad_from_factors(target, u_r, w_a, w_b, u_l, nu) -> complex:
    """``-(i/d^2)(tr[U_t U^+] tr[U_t^+ U_R W_A rho_nu W_B U_L] - c.c.)`` (unprojected)."""
    d = target.shape[0]
    rho_nu = gates.projector(nu, d)
    u = u_r @ w_a @ w_b @ u_l
    t1 = np.trace(target @ u.conj().T)
    t2 = np.trace(target.conj().T @ u_r @ w_a @ rho_nu @ w_b @ u_l)
    return complex(-1j / d**2 * (t1 * t2 - np.conj(t1 * t2)))


def grad_state_cost(spec: StateCost, p: AnsatzParams, r: GradientRequest) -> float:
    _check_dim(spec, p)
    u_r, w_a, w_b, u_l = _factors(p, r)
    z = state_grad_from_factors(spec.observable, spec.rho0, u_r, w_a, w_b, u_l, r.nu)
    return _real(z, "state-cost gradient")


def grad_state_cost_alt(spec: StateCost, p: AnsatzParams, r: GradientRequest) -> float:
    _check_dim(spec, p)
    u_r, w_a, w_b, u_l = _factors(p, r)
    z = state_grad_from_factors_alt(spec.observable, spec.rho0, u_r, w_a, w_b, u_l, r.nu)
    return _real(z, "state-cost gradient")


def grad_gate_cost(spec: GateCost, p: AnsatzParams, r: GradientRequest) -> float:
    _check_dim(spec, p)
    u_r, w_a, w_b, u_l = _factors(p, r)
    z = gate_grad_from_factors(spec.target, u_r, w_a, w_b, u_l, r.nu)
    return _real(z, "gate-cost gradient")


def grad_cost(spec: CostSpec, p: AnsatzParams, r: GradientRequest) -> float:
    if isinstance(spec, StateCost):
        return grad_state_cost(spec, p, r)
    return grad_gate_cost(spec, p, r)


def fd_gradient(
    costfn: Callable[[AnsatzParams], float],
    p: AnsatzParams,
    r: GradientRequest,
    h: float = 1e-5,
) -> float:
    """Central difference in ``theta_{k, nu}``."""
    if h <= 0:
        raise ValueError("step must be positive")
    r.check(p)
    theta = p.blocks[r.k - 1].thetas[r.nu]
    plus = costfn(p.with_theta(r.k, r.nu, theta + h))
    minus = costfn(p.with_theta(r.k, r.nu, theta - h))
    return (plus - minus) / (2 * h)
