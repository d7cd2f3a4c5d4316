"""Closed-form vs summation-oracle checks and Monte Carlo element-moment checks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from snapvar import haar


@dataclass(frozen=True)
class LemmaCheck:
    name: str
    d: int
    max_abs_dev: float
    informational: bool = False


def _ginibre(rng, d, k):
    g = rng.standard_normal((k, d, d)) + 1j * rng.standard_normal((k, d, d))
    return list(g / np.sqrt(2.0))


# (name, operand count, closed form, oracle)
LEMMAS = [
    ("two_trace", 2, haar.lemma_two_trace, haar.sum_oracle_two_trace),
    ("four_trace", 4, haar.lemma_four_trace, haar.sum_oracle_four_trace),
    (
        "four_trace_squared",
        2,
        haar.lemma_four_trace_squared,
        lambda c, dd: haar.sum_oracle_four_trace(c, dd, c, dd),
    ),
    ("conjugation", 2, haar.lemma_conjugation, haar.sum_oracle_conjugation),
    ("conjugation4", 4, haar.lemma_conjugation4, haar.sum_oracle_conjugation4),
    ("product_conjugation", 4, haar.lemma_product_conjugation, haar.sum_oracle_product),
    (
        "quadratic",
        2,
        haar.corollary_quadratic,
        lambda a, b: haar.sum_oracle_product(a, b, a, b),
    ),
]

ALT_VARIANTS = [
    ("four_trace_alt", 4, haar.lemma_four_trace_alt, haar.sum_oracle_four_trace),
    (
        "four_trace_squared_alt",
        2,
        haar.lemma_four_trace_squared_alt,
        lambda c, dd: haar.sum_oracle_four_trace(c, dd, c, dd),
    ),
]


def lemma_checks(d: int, n_tuples: int, rng: np.random.Generator, include_alt=True):
    """Max ``|closed form - oracle|`` over ``n_tuples`` random operator tuples per identity."""
    out = []
    table = LEMMAS + (ALT_VARIANTS if include_alt else [])
    for name, arity, closed, oracle in table:
        dev = 0.0
        for _ in range(n_tuples):
            ops = _ginibre(rng, d, arity)
            dev = max(dev, abs(closed(*ops) - oracle(*ops)))
        out.append(LemmaCheck(name, d, dev, informational=name.endswith("_alt")))
    return out


@dataclass(frozen=True)
class MomentCheck:
    order: int
    indices: tuple[int, ...]
    exact: float
    estimate: complex
    stderr: float

    @property
    def z(self) -> float:
        dev = abs(self.estimate - self.exact)
        if self.stderr == 0.0:
            return 0.0 if dev == 0.0 else np.inf
        return dev / self.stderr


def _mean_se(x: np.ndarray) -> tuple[complex, float]:
    # stderr of a complex mean: sqrt(E|x - mean|^2 / n)
    m = x.mean()
    se = np.sqrt(np.sum(np.abs(x - m) ** 2) / (x.size - 1) / x.size)
    return complex(m), float(se)


def _query1(rng, d, nonzero):
    i1, j1, i2, j2 = rng.integers(0, d, 4)
    if nonzero:
        i2, j2 = i1, j1
    return int(i1), int(j1), int(i2), int(j2)


def _query2(rng, d, nonzero):
    i1, j1, i2, j2, p1, k1, p2, k2 = rng.integers(0, d, 8)
    if nonzero:
        # rows and columns of the conjugated pair are permutations of the unconjugated ones
        p1, p2 = (i1, i2) if rng.random() < 0.5 else (i2, i1)
        k1, k2 = (j1, j2) if rng.random() < 0.5 else (j2, j1)
    return tuple(int(x) for x in (i1, j1, i2, j2, p1, k1, p2, k2))


def moment_checks(d: int, n_draws: int, n_queries: int, rng: np.random.Generator):
    """Compare sample element moments of Haar draws with the Weingarten values.

    Half of the queries are built to have a nonzero exact moment, the rest
    use uniformly random indices (usually zero).
    """
    if d < 2:
        raise ValueError("second-moment checks need d >= 2")
    w = haar.haar_unitaries(d, n_draws, rng)
    out = []
    for q in range(n_queries):
        nonzero = q % 2 == 0
        i1, j1, i2, j2 = _query1(rng, d, nonzero)
        est, se = _mean_se(w[:, i1, j1] * w[:, i2, j2].conj())
        out.append(MomentCheck(1, (i1, j1, i2, j2), float(haar.moment1(i1, j1, i2, j2, d)), est, se))
        idx = _query2(rng, d, nonzero)
        i1, j1, i2, j2, p1, k1, p2, k2 = idx
        x = w[:, i1, j1] * w[:, i2, j2] * (w[:, p1, k1] * w[:, p2, k2]).conj()
        est, se = _mean_se(x)
        out.append(MomentCheck(2, idx, haar.moment2(haar.MomentQuery(*idx, d)), est, se))
    return out
