"""Pure numpy kernels (the fallback backend).

Every function here has a twin with the same signature in ``_ckernels.pyx``.
Displacements are applied through the fixed spectral basis of the generator:
with ``-i (a - a^dagger) = V diag(lam) V^dagger`` we have
``D(alpha) = V diag(exp(i alpha lam)) V^dagger``, so a block never needs a
fresh matrix exponential.

Batched arrays use row-vector layout: ``x[s]`` is the column vector of
sample ``s``, so ``V^dagger x`` becomes ``x @ V.conj()``.
"""
from __future__ import annotations

import numpy as np


class ConvergenceError(RuntimeError):
    pass


def _offdiag_norm(a: np.ndarray) -> float:
    total = float(np.sum(np.abs(a) ** 2) - np.sum(np.abs(np.diag(a)) ** 2))
    return float(np.sqrt(max(total, 0.0)))


def jacobi_eigh(h: np.ndarray, rel_tol: float, max_sweeps: int) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic complex Jacobi rotations; returns unsorted ``(eigenvalues, V)``.

    Each rotation first removes the phase of ``h[p, q]`` and then applies a
    real Givens rotation, so every update is exactly unitary. Stops once the
    off-diagonal Frobenius norm falls to ``rel_tol * ||h||_F``.
    """
    a = np.array(h, dtype=np.complex128, copy=True)
    d = a.shape[0]
    v = np.eye(d, dtype=np.complex128)
    threshold = rel_tol * float(np.linalg.norm(a))
    for _ in range(max_sweeps):
        if _offdiag_norm(a) <= threshold:
            return np.real(np.diag(a)).copy(), v
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                phase = apq / mag
                app, aqq = a[p, p].real, a[q, q].real
                theta = 0.5 * np.arctan2(2.0 * mag, aqq - app)
                c, s = np.cos(theta), np.sin(theta)
                # columns p, q of J = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                j = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ j
                a[idx, :] = j.conj().T @ a[idx, :]
                v[:, idx] = v[:, idx] @ j
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    if _offdiag_norm(a) <= threshold:
        return np.real(np.diag(a)).copy(), v
    raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")


def _disp(x, v, vc, e):
    # D x = V (e * (V^dagger x))
    return ((x @ vc) * e) @ v.T


def _disp_h(x, v, vc, e):
    return ((x @ vc) * e.conj()) @ v.T


def _block(x, v, vc, e, s):
    return _disp_h(_disp(x, v, vc, e) * s, v, vc, e)


def _phases(v, lam, alphas, thetas):
    e = np.exp(1j * alphas[..., None] * lam)  # (n, T, d)
    s = np.exp(1j * thetas)  # (n, T, d)
    return e, s


def state_grads(v, lam, alphas, thetas, k, nu, observable, psi0s, weights):
    """d C_s / d theta_{k, nu} for a batch of uniform-protocol samples.

    ``rho0 = sum_r weights[r] |psi0s[r]><psi0s[r]|``; the gradient is linear
    in ``rho0`` so each pure component is propagated separately.
    """
    v = np.asarray(v, dtype=np.complex128)
    vc = v.conj()
    alphas = np.asarray(alphas, dtype=np.float64)
    thetas = np.asarray(thetas, dtype=np.float64)
    n, t_blocks, d = thetas.shape
    e, s = _phases(v, lam, alphas, thetas)
    kk = k - 1
    low = np.arange(d) <= nu
    s_low = np.where(low, s[:, kk], 1.0)
    s_high = np.where(low, 1.0, s[:, kk])
    obs_t = np.asarray(observable, dtype=np.complex128).T
    out = np.zeros(n)
    for psi0, weight in zip(psi0s, weights):
        x = np.broadcast_to(np.asarray(psi0, dtype=np.complex128), (n, d))
        for t in range(kk):
            x = _block(x, v, vc, e[:, t], s[:, t])
        phi = _disp(x, v, vc, e[:, kk]) * s_high
        w = _disp_h(phi * s_low, v, vc, e[:, kk])
        for t in range(kk + 1, t_blocks):
            w = _block(w, v, vc, e[:, t], s[:, t])
        y = w @ obs_t
        for t in range(t_blocks - 1, kk, -1):
            y = _block(y, v, vc, e[:, t], s[:, t].conj())
        xphi = _disp(y, v, vc, e[:, kk]) * s_low.conj()
        z = phi[:, nu].conj() * xphi[:, nu]
        out += weight * (-2.0 * z.imag)
    return out


def _block_left(m, vh, v, e, s):
    # B m for a batch of matrices: V E^* V^dagger S V E V^dagger m
    m = e[:, :, None] * (vh @ m)
    m = s[:, :, None] * (v @ m)
    m = e.conj()[:, :, None] * (vh @ m)
    return v @ m


def gate_grads(v, lam, alphas, thetas, k, nu, target):
    """d C_g / d theta_{k, nu} for a batch of uniform-protocol samples."""
    v = np.asarray(v, dtype=np.complex128)
    vh = v.conj().T
    alphas = np.asarray(alphas, dtype=np.float64)
    thetas = np.asarray(thetas, dtype=np.float64)
    n, t_blocks, d = thetas.shape
    e, s = _phases(v, lam, alphas, thetas)
    kk = k - 1
    low = np.arange(d) <= nu
    s_low = np.where(low, s[:, kk], 1.0)
    s_high = np.where(low, 1.0, s[:, kk])
    m = np.broadcast_to(np.eye(d, dtype=np.complex128), (n, d, d))
    for t in range(kk + 1, t_blocks):
        m = _block_left(m, vh, v, e[:, t], s[:, t])
    m = np.asarray(target, dtype=np.complex128).conj().T @ m
    for t in range(kk):
        m = _block_left(m, vh, v, e[:, t], s[:, t])
    # Y = W_B P W_A with W_A = D^dagger S_low, W_B = S_high D
    ek = e[:, kk]
    m = ((m @ v) * ek.conj()[:, None, :]) @ vh
    m = m * s_low[:, None, :]
    m = v @ (ek[:, :, None] * (vh @ m))
    m = s_high[:, :, None] * m
    tau = np.trace(m, axis1=1, axis2=2)
    return (2.0 / d**2) * np.imag(tau.conj() * m[:, nu, nu])
