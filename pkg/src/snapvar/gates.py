"""SNAP and displacement gates on a truncated d-level bosonic mode.

Fock labels run ``|0>, ..., |d-1>``. The truncated ladder operators act
inside that space (``a^dagger`` annihilates ``|d-1>``), so the displacement
generator stays anti-Hermitian and ``D(alpha)`` is exactly unitary.

A block is ``B(alpha, theta) = D(alpha)^dagger S(theta) D(alpha)`` and the
ansatz is ``U = B_T ... B_2 B_1`` (block 1 acts first).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from snapvar import linalg


@dataclass(frozen=True)
class BlockParams:
    alpha: float
    thetas: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))
        if len(self.thetas) < 1:
            raise ValueError("a block needs at least one phase")
        if not np.isfinite(self.alpha) or not all(np.isfinite(self.thetas)):
            raise ValueError("block parameters must be finite")

    @property
    def dim(self) -> int:
        return len(self.thetas)


@dataclass(frozen=True)
class AnsatzParams:
    blocks: tuple[BlockParams, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if not self.blocks:
            raise ValueError("ansatz needs at least one block")
        dims = {b.dim for b in self.blocks}
        if len(dims) != 1:
            raise ValueError(f"blocks disagree on dimension: {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.blocks[0].dim

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @classmethod
    def from_arrays(cls, alphas: Sequence[float], thetas) -> "AnsatzParams":
        thetas = np.asarray(thetas, dtype=float)
        return cls(tuple(BlockParams(a, th) for a, th in zip(alphas, thetas)))

    def alphas(self) -> np.ndarray:
        return np.array([b.alpha for b in self.blocks])

    def theta_array(self) -> np.ndarray:
        return np.array([b.thetas for b in self.blocks])

    def with_theta(self, k: int, nu: int, value: float) -> "AnsatzParams":
        """Copy with ``theta_{k, nu}`` replaced (``k`` is 1-based)."""
        blocks = list(self.blocks)
        old = blocks[k - 1]
        thetas = list(old.thetas)
        thetas[nu] = value
        blocks[k - 1] = BlockParams(old.alpha, thetas)
        return AnsatzParams(tuple(blocks))


@dataclass(frozen=True)
class BlockPartition:
    w_a: np.ndarray
    w_b: np.ndarray
    nu: int


def lowering(d: int) -> np.ndarray:
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1).astype(np.complex128)


def raising(d: int) -> np.ndarray:
    return linalg.adjoint(lowering(d))


@lru_cache(maxsize=None)
def _generator_basis(d: int) -> tuple[np.ndarray, np.ndarray]:
    lam, v = linalg.hermitian_eig(-1j * (lowering(d) - raising(d)))
    lam.setflags(write=False)
    v.setflags(write=False)
    return lam, v


def displacement_basis(d: int) -> tuple[np.ndarray, np.ndarray]:
    """``(lam, V)`` with ``-i (a - a^dagger) = V diag(lam) V^dagger``.

    Computed once per dimension; ``D(alpha) = V diag(exp(i alpha lam)) V^dagger``.
    """
    return _generator_basis(int(d))


def displacement(alpha: float, d: int) -> np.ndarray:
    """``exp(alpha a - alpha a^dagger)`` for real ``alpha``."""
    if not np.isfinite(alpha):
        raise ValueError("alpha must be finite")
    if alpha == 0.0:
        return linalg.identity(d)
    lam, v = displacement_basis(d)
    return (v * np.exp(1j * alpha * lam)) @ v.conj().T


def snap(thetas: Sequence[float]) -> np.ndarray:
    return np.diag(np.exp(1j * np.asarray(thetas, dtype=float)))


def block(p: BlockParams) -> np.ndarray:
    dd = displacement(p.alpha, p.dim)
    return dd.conj().T @ snap(p.thetas) @ dd


def ansatz(p: AnsatzParams) -> np.ndarray:
    u = linalg.identity(p.dim)
    for b in p.blocks:
        u = block(b) @ u
    return u


def _check_nu(nu: int, d: int) -> None:
    if not 0 <= nu <= d - 1:
        raise IndexError(f"phase index nu={nu} outside 0..{d - 1}")


def partition_block(p: BlockParams, nu: int) -> BlockPartition:
    """Split a block as ``W_A W_B`` around phase ``nu``.

    ``W_A = D^dagger diag(phases 0..nu)`` and ``W_B = diag(phases nu+1..) D``.
    """
    d = p.dim
    _check_nu(nu, d)
    phases = np.exp(1j * np.asarray(p.thetas))
    low = np.arange(d) <= nu
    dd = displacement(p.alpha, d)
    w_a = dd.conj().T * np.where(low, phases, 1.0)
    w_b = np.where(low, 1.0, phases)[:, None] * dd
    return BlockPartition(w_a, w_b, nu)


def split_ansatz(p: AnsatzParams, k: int) -> tuple[np.ndarray, BlockParams, np.ndarray]:
    """``(U_R, B_k, U_L)`` with ``U = U_R B_k U_L`` and ``k`` 1-based."""
    if not 1 <= k <= p.n_blocks:
        raise IndexError(f"block index k={k} outside 1..{p.n_blocks}")
    u_l = linalg.identity(p.dim)
    for b in p.blocks[: k - 1]:
        u_l = block(b) @ u_l
    u_r = linalg.identity(p.dim)
    for b in p.blocks[k:]:
        u_r = block(b) @ u_r
    return u_r, p.blocks[k - 1], u_l


def block_gradient(p: BlockParams, nu: int) -> np.ndarray:
    """``dB/dtheta_nu = i W_A |nu><nu| W_B``."""
    part = partition_block(p, nu)
    return 1j * np.outer(part.w_a[:, nu], part.w_b[nu, :])


def projector(nu: int, d: int) -> np.ndarray:
    _check_nu(nu, d)
    rho = np.zeros((d, d), dtype=np.complex128)
    rho[nu, nu] = 1.0
    return rho
