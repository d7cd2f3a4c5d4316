"""Dense complex linear algebra on square matrices.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. The helpers here
add the dimension checks and tolerances the rest of the package relies on,
plus a cyclic Jacobi eigensolver for Hermitian matrices and the matrix
exponential of anti-Hermitian generators built on top of it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from snapvar import kernels


class DimensionError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


@dataclass
class Tolerances:
    """Module-wide tolerances; mutate ``TOL`` to override."""

    unitary: float = 1e-10
    hermitian: float = 1e-10
    diagonal: float = 1e-10
    jacobi: float = 1e-12
    imag_residue: float = 1e-10
    jacobi_max_sweeps: int = 100


TOL = Tolerances()


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def _check_same(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")


def identity(d: int) -> np.ndarray:
    return np.eye(d, dtype=np.complex128)


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    _check_same(a, b)
    return a @ b


def adjoint(a) -> np.ndarray:
    return as_matrix(a).conj().T


def trace(a) -> complex:
    return complex(np.trace(as_matrix(a)))


def frobenius_distance(a, b) -> float:
    a, b = as_matrix(a), as_matrix(b)
    _check_same(a, b)
    return float(np.linalg.norm(a - b))


def unitarity_error(u) -> float:
    """``||u^dagger u - I||_F``."""
    u = as_matrix(u)
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])))


def is_unitary(u, tol: float | None = None) -> bool:
    return unitarity_error(u) <= (TOL.unitary if tol is None else tol)


def is_hermitian(h, tol: float | None = None) -> bool:
    h = as_matrix(h)
    return float(np.linalg.norm(h - h.conj().T)) <= (TOL.hermitian if tol is None else tol)


def is_diagonal(a, tol: float | None = None) -> bool:
    a = as_matrix(a)
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off)) <= (TOL.diagonal if tol is None else tol)


def hermitian_eig(h, tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition ``h = V diag(lam) V^dagger`` with ascending ``lam``."""
    h = as_matrix(h)
    if not is_hermitian(h, TOL.hermitian if tol is None else tol):
        raise NotHermitianError("hermitian_eig needs a Hermitian matrix")
    h = 0.5 * (h + h.conj().T)
    lam, v = kernels.jacobi_eigh(h, TOL.jacobi, TOL.jacobi_max_sweeps)
    order = np.argsort(lam, kind="stable")
    return lam[order], v[:, order]


def expm_antihermitian(g) -> np.ndarray:
    """``exp(g)`` for anti-Hermitian ``g`` via the spectrum of ``-i g``."""
    g = as_matrix(g)
    if float(np.linalg.norm(g + g.conj().T)) > TOL.hermitian:
        raise NotHermitianError("expm_antihermitian needs g^dagger == -g")
    lam, v = hermitian_eig(-1j * g)
    return (v * np.exp(1j * lam)) @ v.conj().T
