"""Seeded Monte Carlo estimates of SNAP-phase gradient statistics.

Three sampling regimes:

``uniform``
    The physical protocol: every ``alpha`` uniform on ``alpha_range`` and
    every phase uniform on ``[0, 2 pi)``.
``haar-factors``
    ``W_A``, ``W_B`` and every block inside ``U_L``/``U_R`` replaced by
    independent Haar unitaries; the setting the closed forms assume.
``haar-blocks``
    Block ``k`` keeps its uniform SNAP-displacement parameters, every other
    block is an independent Haar unitary.

Samples are processed in fixed-size chunks; chunk ``c`` of a grid point
draws from ``SeededRng(seed).child(regime, d, T).substream(c)`` and chunk
moments are merged in chunk order, so results do not depend on how many
worker threads evaluate the chunks.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from snapvar import analytic, gates, kernels
from snapvar.cost import CostSpec, GateCost, StateCost
from snapvar.gates import AnsatzParams
from snapvar.haar import SeededRng, frame_potential, haar_unitaries
from snapvar.stats import GradStats, Moments, merge_all

CHUNK_SIZE = 1000
TWO_PI = 2.0 * math.pi


class Regime(str, Enum):
    UNIFORM = "uniform"
    HAAR_FACTORS = "haar-factors"
    HAAR_BLOCKS = "haar-blocks"


_REGIME_KEY = {Regime.UNIFORM: 0, Regime.HAAR_FACTORS: 1, Regime.HAAR_BLOCKS: 2}


@dataclass(frozen=True)
class CostTemplate:
    """A cost family indexed by dimension (``build(d)`` gives the concrete cost)."""

    kind: str  # "state" or "gate"
    label: str
    factory: Callable[[int], CostSpec] = field(compare=False, repr=False)
    dim: int | None = None  # set when the cost exists in one dimension only

    def build(self, d: int) -> CostSpec:
        spec = self.factory(d)
        if spec.dim != d:
            raise ValueError(f"cost {self.label!r} is {spec.dim}-dimensional, requested d={d}")
        return spec


def fock0_cost() -> CostTemplate:
    return CostTemplate("state", "fock0", lambda d: StateCost(gates.projector(0, d)))


def number_cost() -> CostTemplate:
    return CostTemplate(
        "state", "number", lambda d: StateCost(analytic.particle_number_observable(d))
    )


def identity_target() -> CostTemplate:
    return CostTemplate("gate", "identity", lambda d: GateCost(np.eye(d, dtype=complex)))


def fixed_cost(spec: CostSpec, label: str) -> CostTemplate:
    kind = "state" if isinstance(spec, StateCost) else "gate"
    return CostTemplate(kind, label, lambda d: spec, dim=spec.dim)


@dataclass(frozen=True)
class SweepConfig:
    cost: CostTemplate
    d_values: tuple[int, ...]
    t_values: tuple[int, ...]
    k: int = 3
    nu: int = 1
    n_samples: int = 10_000
    seed: int = 0
    regime: Regime = Regime.UNIFORM
    alpha_range: tuple[float, float] = (0.0, TWO_PI)

    def __post_init__(self):
        object.__setattr__(self, "d_values", tuple(int(d) for d in self.d_values))
        object.__setattr__(self, "t_values", tuple(int(t) for t in self.t_values))
        object.__setattr__(self, "regime", Regime(self.regime))
        lo, hi = self.alpha_range
        object.__setattr__(self, "alpha_range", (float(lo), float(hi)))
        if self.n_samples < 100:
            raise ValueError("n_samples must be >= 100")
        if self.k < 1 or (self.t_values and self.k > min(self.t_values)):
            raise ValueError(f"k={self.k} must lie in 1..min(T)")
        if self.d_values and min(self.d_values) < 2:
            raise ValueError("dimensions must be >= 2")
        if self.nu < 0 or (self.d_values and self.nu > min(self.d_values) - 1):
            raise ValueError(f"nu={self.nu} must lie in 0..min(d)-1")
        if hi < lo:
            raise ValueError("alpha_range must be (low, high) with low <= high")

    def describe(self) -> dict:
        return {
            "cost": self.cost.kind,
            "cost_label": self.cost.label,
            "d_values": list(self.d_values),
            "t_values": list(self.t_values),
            "k": self.k,
            "nu": self.nu,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "regime": self.regime.value,
            "alpha_range": list(self.alpha_range),
            "chunk_size": CHUNK_SIZE,
        }


@dataclass(frozen=True)
class SweepRow:
    cost: str
    regime: Regime
    d: int
    t: int
    k: int
    nu: int
    stats: GradStats
    analytic: analytic.VariancePrediction


# -- parameter sampling ------------------------------------------------------


def _uniform_arrays(u: np.ndarray, d: int, t: int, alpha_range) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = alpha_range
    alphas = lo + (hi - lo) * u[:, :t]
    thetas = TWO_PI * u[:, t:].reshape(u.shape[0], t, d)
    return alphas, thetas


def sample_params(cfg: SweepConfig, d: int, t: int, stream: np.random.Generator) -> AnsatzParams:
    """One uniform draw; consumes the stream exactly like one row of a chunk."""
    u = stream.random((1, t * (d + 1)))
    alphas, thetas = _uniform_arrays(u, d, t, cfg.alpha_range)
    return AnsatzParams.from_arrays(alphas[0], thetas[0])


# -- batched gradients from explicit factors ---------------------------------


def _products(mats: np.ndarray, d: int) -> np.ndarray:
    """``M_last ... M_1`` along axis 1 of ``(n, m, d, d)``; identity when m == 0."""
    n = mats.shape[0]
    out = np.broadcast_to(np.eye(d, dtype=complex), (n, d, d))
    for j in range(mats.shape[1]):
        out = mats[:, j] @ out
    return out


def factor_state_grads(spec: StateCost, u_r, w_a, w_b, u_l, nu: int) -> np.ndarray:
    """Batched state-cost derivative for stacks of factor matrices.

    Evaluates ``-i tr(X [rho_nu, W_B U_L rho0 U_L^+ W_B^+])`` one pure
    component of ``rho0`` at a time, where it reduces to
    ``-2 Im(conj(phi_nu) (X phi)_nu)`` with ``phi = W_B U_L psi``.
    """
    vecs, weights = spec.pure_components()
    out = np.zeros(u_r.shape[0])
    for psi, w in zip(vecs, weights):
        phi = np.einsum("nij,nj->ni", w_b @ u_l, np.broadcast_to(psi, (u_r.shape[0], psi.size)))
        chain = u_r @ w_a
        x_phi = np.einsum(
            "nji,nj->ni", chain.conj(), np.einsum("ij,nj->ni", spec.observable, np.einsum("nij,nj->ni", chain, phi))
        )
        out += w * (-2.0 * np.imag(phi[:, nu].conj() * x_phi[:, nu]))
    return out


def factor_gate_grads(spec: GateCost, u_r, w_a, w_b, u_l, nu: int) -> np.ndarray:
    d = spec.dim
    y = w_b @ u_l @ spec.target.conj().T @ u_r @ w_a
    tau = np.trace(y, axis1=1, axis2=2)
    return (2.0 / d**2) * np.imag(tau.conj() * y[:, nu, nu])


def _factor_grads(spec: CostSpec, u_r, w_a, w_b, u_l, nu):
    if isinstance(spec, StateCost):
        return factor_state_grads(spec, u_r, w_a, w_b, u_l, nu)
    return factor_gate_grads(spec, u_r, w_a, w_b, u_l, nu)


def _partition_batch(alphas: np.ndarray, thetas: np.ndarray, nu: int):
    """Stacks of ``W_A`` and ``W_B`` for block parameters ``(n,)`` and ``(n, d)``."""
    d = thetas.shape[1]
    lam, v = gates.displacement_basis(d)
    e = np.exp(1j * alphas[:, None] * lam)
    disp = (v[None] * e[:, None, :]) @ v.conj().T
    phases = np.exp(1j * thetas)
    low = np.arange(d) <= nu
    w_a = disp.conj().transpose(0, 2, 1) * np.where(low, phases, 1.0)[:, None, :]
    w_b = np.where(low, 1.0, phases)[:, :, None] * disp
    return w_a, w_b


# -- chunk evaluation ----------------------------------------------------------


def _chunk_uniform(spec, d, t, k, nu, m, gen, alpha_range):
    u = gen.random((m, t * (d + 1)))
    alphas, thetas = _uniform_arrays(u, d, t, alpha_range)
    lam, v = gates.displacement_basis(d)
    if isinstance(spec, StateCost):
        vecs, weights = spec.pure_components()
        return kernels.state_grads(v, lam, alphas, thetas, k, nu, spec.observable, vecs, weights)
    return kernels.gate_grads(v, lam, alphas, thetas, k, nu, spec.target)


def _chunk_haar_factors(spec, d, t, k, nu, m, gen):
    draws = haar_unitaries(d, m * (t + 1), gen).reshape(m, t + 1, d, d)
    w_a, w_b = draws[:, 0], draws[:, 1]
    others = draws[:, 2:]
    u_l = _products(others[:, : k - 1], d)
    u_r = _products(others[:, k - 1 :], d)
    return _factor_grads(spec, u_r, w_a, w_b, u_l, nu)


def _chunk_haar_blocks(spec, d, t, k, nu, m, gen, alpha_range):
    u = gen.random((m, d + 1))
    alphas, thetas = _uniform_arrays(u, d, 1, alpha_range)
    w_a, w_b = _partition_batch(alphas[:, 0], thetas[:, 0], nu)
    others = haar_unitaries(d, m * (t - 1), gen).reshape(m, t - 1, d, d)
    u_l = _products(others[:, : k - 1], d)
    u_r = _products(others[:, k - 1 :], d)
    return _factor_grads(spec, u_r, w_a, w_b, u_l, nu)


def _run_chunks(fn, n_samples: int, threads: int) -> Moments:
    n_chunks = -(-n_samples // CHUNK_SIZE)
    sizes = [min(CHUNK_SIZE, n_samples - c * CHUNK_SIZE) for c in range(n_chunks)]

    def work(c):
        return Moments.from_batch(fn(c, sizes[c]))

    if threads <= 1:
        parts = [work(c) for c in range(n_chunks)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, range(n_chunks)))
    return merge_all(parts)


def sample_gradients(
    spec: CostSpec,
    regime: Regime,
    d: int,
    t: int,
    k: int,
    nu: int,
    n_samples: int,
    seed: int,
    alpha_range=(0.0, TWO_PI),
    threads: int = 1,
) -> Moments:
    regime = Regime(regime)
    if spec.dim != d:
        raise ValueError(f"cost is {spec.dim}-dimensional, requested d={d}")
    if not 1 <= k <= t:
        raise ValueError(f"k={k} outside 1..{t}")
    if not 0 <= nu <= d - 1:
        raise ValueError(f"nu={nu} outside 0..{d - 1}")
    streams = SeededRng(seed).child(_REGIME_KEY[regime], d, t)

    def fn(c, m):
        gen = streams.substream(c)
        if regime is Regime.UNIFORM:
            return _chunk_uniform(spec, d, t, k, nu, m, gen, alpha_range)
        if regime is Regime.HAAR_FACTORS:
            return _chunk_haar_factors(spec, d, t, k, nu, m, gen)
        return _chunk_haar_blocks(spec, d, t, k, nu, m, gen, alpha_range)

    return _run_chunks(fn, n_samples, threads)


def estimate_gradient_stats(cfg: SweepConfig, d: int, t: int, threads: int = 1) -> GradStats:
    spec = cfg.cost.build(d)
    m = sample_gradients(
        spec, cfg.regime, d, t, cfg.k, cfg.nu, cfg.n_samples, cfg.seed, cfg.alpha_range, threads
    )
    return GradStats.from_moments(m, cfg.seed)


def estimate_haar_factor_stats(
    cost: CostSpec, d: int, n_samples: int, seed: int, nu: int = 1, threads: int = 1
) -> GradStats:
    """Haar-factor regime with one Haar block on each side of the differentiated block."""
    m = sample_gradients(cost, Regime.HAAR_FACTORS, d, 3, 2, nu, n_samples, seed, threads=threads)
    return GradStats.from_moments(m, seed)


def analytic_prediction(spec: CostSpec, d: int) -> analytic.VariancePrediction:
    if isinstance(spec, StateCost):
        return analytic.VariancePrediction(d, analytic.state_variance(spec.observable, d), "state_cost")
    return analytic.VariancePrediction(d, analytic.gate_variance(spec.target, d), "gate_cost")


def run_sweep(cfg: SweepConfig, threads: int = 1) -> list[SweepRow]:
    rows = []
    for d in cfg.d_values:
        spec = cfg.cost.build(d)
        prediction = analytic_prediction(spec, d)
        for t in cfg.t_values:
            stats = estimate_gradient_stats(cfg, d, t, threads)
            rows.append(SweepRow(cfg.cost.kind, cfg.regime, d, t, cfg.k, cfg.nu, stats, prediction))
    return rows


def sweep_slopes(rows: Sequence[SweepRow]) -> dict[int, tuple[float, float]]:
    """Log-log slope of variance against d for each T (needs >= 2 dimensions)."""
    out = {}
    for t in sorted({r.t for r in rows}):
        sel = [r for r in rows if r.t == t and r.stats.variance > 0]
        if len({r.d for r in sel}) >= 2:
            out[t] = analytic.loglog_slope([r.d for r in sel], [r.stats.variance for r in sel])
    return out


# -- particle-number adjudication ----------------------------------------------


@dataclass(frozen=True)
class AdjudicationRow:
    d: int
    stats: GradStats
    candidates: dict[str, float]
    consistent: tuple[str, ...]


def adjudicate_particle_number(
    d_values: Sequence[int],
    n_samples: int,
    seed: int,
    candidates: Sequence[str] | None = None,
    sigmas: float = 3.0,
    nu: int = 1,
    threads: int = 1,
) -> tuple[list[AdjudicationRow], str | None]:
    """Compare Haar-factor variance estimates with particle-number closed forms.

    Returns one row per dimension and the single candidate consistent at every
    dimension within ``sigmas`` standard errors (``None`` if not unique).
    """
    names = list(candidates or analytic.PARTICLE_NUMBER_CANDIDATES)
    rows = []
    for d in d_values:
        spec = StateCost(analytic.particle_number_observable(d))
        stats = estimate_haar_factor_stats(spec, d, n_samples, seed, nu=nu, threads=threads)
        values = {name: analytic.PARTICLE_NUMBER_CANDIDATES[name](d) for name in names}
        ok = tuple(name for name, v in values.items() if stats.variance_z(v) <= sigmas)
        rows.append(AdjudicationRow(d, stats, values, ok))
    surviving = [n for n in names if all(n in r.consistent for r in rows)]
    return rows, (surviving[0] if len(surviving) == 1 else None)


# -- 2-design diagnostics ----------------------------------------------------


@dataclass(frozen=True)
class FrameRow:
    ensemble: str
    t: int
    value: float
    stderr: float
    haar_value: float
    haar_stderr: float

    @property
    def ratio(self) -> float:
        return self.value / self.haar_value

    @property
    def z(self) -> float:
        se = math.hypot(self.stderr, self.haar_stderr)
        return abs(self.value - self.haar_value) / se if se > 0 else 0.0


def ensemble_samplers(d: int, nu: int = 1, alpha_range=(0.0, TWO_PI)) -> dict[str, Callable]:
    lo, hi = alpha_range

    def params(rng, n):
        return lo + (hi - lo) * rng.random(n), TWO_PI * rng.random((n, d))

    def w_a(rng, n):
        return _partition_batch(*params(rng, n), nu)[0]

    def w_b(rng, n):
        return _partition_batch(*params(rng, n), nu)[1]

    def blocks(rng, n):
        a, b = _partition_batch(*params(rng, n), nu)
        return a @ b

    return {
        "haar": lambda rng, n: haar_unitaries(d, n, rng),
        "w_a": w_a,
        "w_b": w_b,
        "block": blocks,
    }


def two_design_report(
    d: int, n_pairs: int, seed: int, nu: int = 1, alpha_range=(0.0, TWO_PI)
) -> list[FrameRow]:
    if d < 2:
        raise ValueError("d must be >= 2")
    if not 0 <= nu <= d - 1:
        raise ValueError(f"nu={nu} outside 0..{d - 1}")
    streams = SeededRng(seed).child(7, d)
    samplers = ensemble_samplers(d, nu, alpha_range)
    haar_sampler = samplers["haar"]
    rows = []
    for t in (1, 2):
        ref, ref_se = frame_potential(haar_sampler, t, n_pairs, streams.substream(100 + t))
        for i, (name, sampler) in enumerate(samplers.items()):
            val, se = frame_potential(sampler, t, n_pairs, streams.substream(10 * t + i))
            rows.append(FrameRow(name, t, val, se, ref, ref_se))
    return rows
