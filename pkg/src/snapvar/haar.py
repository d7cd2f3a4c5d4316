"""Haar-random unitaries, Weingarten moments and the trace-integral identities.

Every closed-form integral has an independent check: ``sum_oracle_*``
expands the integrand into monomials of matrix elements and weights each by
the exact first or second element moment, summing over all indices.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from snapvar import linalg

MAX_ORACLE_DIM = 6


@dataclass(frozen=True)
class SeededRng:
    """Deterministic stream factory.

    ``substream(i)`` depends only on ``(master_seed, key, i)``; ``child(...)``
    extends the key, giving an independent family of streams.
    """

    master_seed: int
    key: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "master_seed", int(self.master_seed) % 2**64)

    def child(self, *key: int) -> "SeededRng":
        return SeededRng(self.master_seed, self.key + tuple(int(k) for k in key))

    def substream(self, i: int) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=self.key + (int(i),))
        return np.random.Generator(np.random.PCG64(seq))


def haar_unitaries(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` independent Haar unitaries, shape ``(n, d, d)``.

    Complex Ginibre matrices are QR-factored and the columns of Q rescaled
    by the phases of R's diagonal, which removes the QR gauge freedom.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    g = rng.standard_normal((n, d, d, 2))
    z = (g[..., 0] + 1j * g[..., 1]) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (diag / np.abs(diag))[:, None, :]


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    return haar_unitaries(d, 1, rng)[0]


def _delta(a, b):
    return np.equal(a, b).astype(float)


def _check_indices(d: int, *idx) -> None:
    for i in idx:
        if np.any(np.asarray(i) < 0) or np.any(np.asarray(i) >= d):
            raise IndexError(f"index outside 0..{d - 1}")


def moment1(i1, j1, i2, j2, d: int):
    """``E[w_{i1 j1} conj(w_{i2 j2})]``; accepts broadcastable index arrays."""
    _check_indices(d, i1, j1, i2, j2)
    return _delta(i1, i2) * _delta(j1, j2) / d


@dataclass(frozen=True)
class MomentQuery:
    """Indices of ``E[w_{i1 j1} w_{i2 j2} conj(w_{p1 k1}) conj(w_{p2 k2})]``."""

    i1: int
    j1: int
    i2: int
    j2: int
    p1: int
    k1: int
    p2: int
    k2: int
    d: int

    def indices(self) -> tuple[int, ...]:
        return (self.i1, self.j1, self.i2, self.j2, self.p1, self.k1, self.p2, self.k2)


def moment2_raw(i1, j1, i2, j2, p1, k1, p2, k2, d: int):
    """Second Weingarten element moment; accepts broadcastable index arrays."""
    if d < 2:
        raise ValueError("second-moment formula needs d >= 2")
    _check_indices(d, i1, j1, i2, j2, p1, k1, p2, k2)
    rows_id = _delta(i1, p1) * _delta(i2, p2)
    rows_sw = _delta(i1, p2) * _delta(i2, p1)
    cols_id = _delta(j1, k1) * _delta(j2, k2)
    cols_sw = _delta(j1, k2) * _delta(j2, k1)
    same = rows_id * cols_id + rows_sw * cols_sw
    mixed = rows_id * cols_sw + rows_sw * cols_id
    return same / (d * d - 1) - mixed / (d * (d * d - 1))


def moment2(q: MomentQuery) -> float:
    return float(moment2_raw(*q.indices(), q.d))


def _dims(*ops) -> int:
    mats = [linalg.as_matrix(o) for o in ops]
    d = mats[0].shape[0]
    for m in mats[1:]:
        if m.shape[0] != d:
            raise linalg.DimensionError("operators must share one dimension")
    return d


def _need_two(d: int) -> None:
    if d < 2:
        raise ValueError("second-moment identities need d >= 2")


def _tr(m) -> complex:
    return complex(np.trace(m))


def lemma_two_trace(c, dd) -> complex:
    """``E[tr(WC) tr(W^+ D)] = tr(CD)/d``."""
    d = _dims(c, dd)
    return _tr(np.asarray(c) @ dd) / d


def lemma_four_trace(c, dd, e, f) -> complex:
    """``E[tr(WC) tr(W^+D) tr(WE) tr(W^+F)]``."""
    d = _dims(c, dd, e, f)
    _need_two(d)
    c, dd, e, f = (np.asarray(m, dtype=complex) for m in (c, dd, e, f))
    first = _tr(c @ dd) * _tr(e @ f) + _tr(c @ f) * _tr(e @ dd)
    second = _tr(c @ dd @ e @ f) + _tr(c @ f @ e @ dd)
    return first / (d * d - 1) - second / (d * (d * d - 1))


def lemma_four_trace_squared(c, dd) -> complex:
    """``E[(tr(WC) tr(W^+D))^2]``, the ``E=C, F=D`` reduction of the four-trace formula."""
    d = _dims(c, dd)
    _need_two(d)
    cd = np.asarray(c, dtype=complex) @ dd
    return 2 * _tr(cd) ** 2 / (d * d - 1) - 2 * _tr(cd @ cd) / (d * (d * d - 1))


def lemma_four_trace_alt(c, dd, e, f) -> complex:
    """Alternative coefficients with ``1/(d^2-1)`` on the four-fold trace terms (kept for comparison)."""
    d = _dims(c, dd, e, f)
    _need_two(d)
    c, dd, e, f = (np.asarray(m, dtype=complex) for m in (c, dd, e, f))
    first = _tr(c @ dd) * _tr(e @ f) + _tr(c @ f) * _tr(e @ dd)
    second = _tr(c @ dd @ e @ f) + _tr(c @ f @ e @ dd)
    return (first - second) / (d * d - 1)


def lemma_four_trace_squared_alt(c, dd) -> complex:
    """Alternative form ``2/(d^2-1) tr(CD)^2 - (tr[(CD)^2])^2 / (d(d^2-1))`` (kept for comparison)."""
    d = _dims(c, dd)
    _need_two(d)
    cd = np.asarray(c, dtype=complex) @ dd
    return 2 * _tr(cd) ** 2 / (d * d - 1) - _tr(cd @ cd) ** 2 / (d * (d * d - 1))


def lemma_conjugation(a, b) -> complex:
    """``E[tr(W A W^+ B)] = tr(A) tr(B) / d``."""
    d = _dims(a, b)
    return _tr(a) * _tr(b) / d


def lemma_conjugation4(a, b, c, dd) -> complex:
    """``E[tr(W A W^+ B W C W^+ D)]``."""
    d = _dims(a, b, c, dd)
    _need_two(d)
    a, b, c, dd = (np.asarray(m, dtype=complex) for m in (a, b, c, dd))
    ta, tb, tc, td = _tr(a), _tr(b), _tr(c), _tr(dd)
    tac, tbd = _tr(a @ c), _tr(b @ dd)
    return (ta * tc * tbd + tac * tb * td) / (d * d - 1) - (tac * tbd + ta * tb * tc * td) / (
        d * (d * d - 1)
    )


def lemma_product_conjugation(a, b, c, dd) -> complex:
    """``E[tr(W A W^+ B) tr(W C W^+ D)]``."""
    d = _dims(a, b, c, dd)
    _need_two(d)
    a, b, c, dd = (np.asarray(m, dtype=complex) for m in (a, b, c, dd))
    ta, tb, tc, td = _tr(a), _tr(b), _tr(c), _tr(dd)
    tac, tbd = _tr(a @ c), _tr(b @ dd)
    return (ta * tb * tc * td + tac * tbd) / (d * d - 1) - (tac * tb * td + ta * tc * tbd) / (
        d * (d * d - 1)
    )


def corollary_quadratic(a, b) -> complex:
    """``E[(tr(W A W^+ B))^2]``."""
    d = _dims(a, b)
    _need_two(d)
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    ta, tb, ta2, tb2 = _tr(a), _tr(b), _tr(a @ a), _tr(b @ b)
    return (ta**2 * (tb**2 - tb2 / d) + ta2 * (tb2 - tb**2 / d)) / (d * d - 1)


# exhaustive-summation oracles


def _oracle_dim(*ops) -> int:
    d = _dims(*ops)
    if d > MAX_ORACLE_DIM:
        raise ValueError(f"summation oracle limited to d <= {MAX_ORACLE_DIM} (got {d})")
    return d


@lru_cache(maxsize=None)
def moment1_tensor(d: int) -> np.ndarray:
    """``T[i1, j1, i2, j2] = moment1(i1, j1, i2, j2)`` over all indices (read-only, cached)."""
    t = moment1(*np.indices((d,) * 4), d)
    t.setflags(write=False)
    return t


@lru_cache(maxsize=None)
def moment2_tensor(d: int) -> np.ndarray:
    """``T[i1, j1, i2, j2, p1, k1, p2, k2]`` over all indices (read-only, cached)."""
    t = moment2_raw(*np.indices((d,) * 8), d)
    t.setflags(write=False)
    return t


def _sum(spec: str, *arrays) -> complex:
    return complex(np.einsum(spec, *arrays, optimize=True))


def sum_oracle_two_trace(c, dd) -> complex:
    # tr(WC) tr(W^+D) = sum W_ij C_ji conj(W_mk) D_mk
    d = _oracle_dim(c, dd)
    return _sum("ji,mk,ijmk->", np.asarray(c), np.asarray(dd), moment1_tensor(d))


def sum_oracle_conjugation(a, b) -> complex:
    # tr(W A W^+ B) = sum W_ab A_bc conj(W_ec) B_ea
    d = _oracle_dim(a, b)
    return _sum("bc,ea,abec->", np.asarray(a), np.asarray(b), moment1_tensor(d))


def sum_oracle_four_trace(c, dd, e, f) -> complex:
    # W_ij C_ji . conj(W_mk) D_mk . W_ab E_ba . conj(W_ce) F_ce
    d = _oracle_dim(c, dd, e, f)
    _need_two(d)
    ops = [np.asarray(m) for m in (c, dd, e, f)]
    return _sum("ji,mk,ba,ce,ijabmkce->", *ops, moment2_tensor(d))


def sum_oracle_conjugation4(a, b, c, dd) -> complex:
    # W_ab A_bc conj(W_ec) B_ef W_fg C_gh conj(W_kh) D_ka
    d = _oracle_dim(a, b, c, dd)
    _need_two(d)
    ops = [np.asarray(m) for m in (a, b, c, dd)]
    return _sum("bc,ef,gh,ka,abfgeckh->", *ops, moment2_tensor(d))


def sum_oracle_product(a, b, c, dd) -> complex:
    # W_ab A_bc conj(W_ec) B_ea . W_fg C_gh conj(W_kh) D_kf
    d = _oracle_dim(a, b, c, dd)
    _need_two(d)
    ops = [np.asarray(m) for m in (a, b, c, dd)]
    return _sum("bc,ea,gh,kf,abfgeckh->", *ops, moment2_tensor(d))


def frame_potential(
    sampler: Callable[[np.random.Generator, int], np.ndarray],
    t: int,
    n_pairs: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Monte Carlo ``E|tr(U^+ V)|^(2t)`` over independent pairs; returns ``(value, stderr)``."""
    if t not in (1, 2):
        raise ValueError("t must be 1 or 2")
    if n_pairs < 1000:
        raise ValueError("n_pairs must be >= 1000")
    u = sampler(rng, n_pairs)
    v = sampler(rng, n_pairs)
    overlap = np.einsum("nij,nij->n", u.conj(), v)
    x = np.abs(overlap) ** (2 * t)
    return float(x.mean()), float(x.std(ddof=1) / np.sqrt(n_pairs))
