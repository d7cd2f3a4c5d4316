"""Mergeable central-moment accumulators and the gradient summary record."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable

import numpy as np


@dataclass(frozen=True)
class Moments:
    """Count, mean and central sums ``M_p = sum (x - mean)^p`` for p = 2, 3, 4."""

    n: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = 0.0
    m4: float = 0.0

    @classmethod
    def from_batch(cls, x) -> "Moments":
        x = np.asarray(x, dtype=float).ravel()
        if x.size == 0:
            return cls()
        mean = float(x.mean())
        c = x - mean
        c2 = c * c
        return cls(x.size, mean, float(c2.sum()), float((c2 * c).sum()), float((c2 * c2).sum()))

    def merge(self, other: "Moments") -> "Moments":
        # pairwise update of Pebay (2008); exact in exact arithmetic
        if other.n == 0:
            return self
        if self.n == 0:
            return other
        na, nb = self.n, other.n
        n = na + nb
        delta = other.mean - self.mean
        d2 = delta * delta
        mean = self.mean + delta * nb / n
        m2 = self.m2 + other.m2 + d2 * na * nb / n
        m3 = (
            self.m3
            + other.m3
            + d2 * delta * na * nb * (na - nb) / n**2
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n
        )
        m4 = (
            self.m4
            + other.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / n**3
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / n**2
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n
        )
        return Moments(n, mean, m2, m3, m4)


def merge_all(parts: Iterable[Moments]) -> Moments:
    """Left fold in the given order (callers pass chunks in index order)."""
    return reduce(Moments.merge, parts, Moments())


@dataclass(frozen=True)
class GradStats:
    n_samples: int
    mean: float
    variance: float
    stderr_mean: float
    stderr_variance: float
    master_seed: int

    @classmethod
    def from_moments(cls, m: Moments, master_seed: int) -> "GradStats":
        n = m.n
        if n < 2:
            raise ValueError("need at least two samples")
        var = max(m.m2 / (n - 1), 0.0)
        mu4 = m.m4 / n
        var_of_var = max(mu4 - var * var * (n - 3) / (n - 1), 0.0) / n
        return cls(n, m.mean, var, math.sqrt(var / n), math.sqrt(var_of_var), master_seed)

    @classmethod
    def from_samples(cls, x, master_seed: int = 0) -> "GradStats":
        return cls.from_moments(Moments.from_batch(x), master_seed)

    def mean_z(self) -> float:
        """``|mean| / stderr_mean`` (0 when both vanish)."""
        if self.stderr_mean == 0.0:
            return 0.0 if self.mean == 0.0 else math.inf
        return abs(self.mean) / self.stderr_mean

    def variance_z(self, expected: float) -> float:
        if self.stderr_variance == 0.0:
            return 0.0 if self.variance == expected else math.inf
        return abs(self.variance - expected) / self.stderr_variance
