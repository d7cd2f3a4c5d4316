"""Closed-form gradient-variance predictions.

Two families live here. ``state_variance``, ``gate_variance`` and
``particle_number_variance_reported`` are the reference closed forms, kept
verbatim. The ``*_haar`` functions are exact second moments of the same
gradient expressions when every partition factor is an independent Haar
unitary; they were derived from the Weingarten identities in ``haar`` and
are what the Monte Carlo estimates actually converge to.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from snapvar import linalg

FORMULA_IDS = (
    "state_cost",
    "state_cost_haar",
    "gate_cost",
    "gate_cost_haar",
    "particle_number_reported",
    "particle_number_derived",
    "particle_number_haar",
    "qubit_bound",
)


@dataclass(frozen=True)
class VariancePrediction:
    d: int
    value: float
    formula_id: str

    def __post_init__(self):
        if self.formula_id not in FORMULA_IDS:
            raise ValueError(f"unknown formula id {self.formula_id!r}")


def _need_two(d: int) -> None:
    if d < 2:
        raise ValueError("variance formulas need d >= 2")


def _spread(observable, d: int) -> float:
    """``tr(O^2) - tr(O)^2 / d`` (non-negative by Cauchy-Schwarz)."""
    o = linalg.as_matrix(observable)
    if o.shape[0] != d:
        raise linalg.DimensionError(f"observable is {o.shape[0]}-dimensional, expected {d}")
    if not linalg.is_hermitian(o):
        raise ValueError("observable must be Hermitian")
    tr = np.trace(o).real
    tr2 = np.trace(o @ o).real
    return max(float(tr2 - tr * tr / d), 0.0)


def state_variance(observable, d: int) -> float:
    """Reference state-cost prediction ``2/((d-1)(d+1)^2) * (tr O^2 - (tr O)^2/d)``."""
    _need_two(d)
    return 2.0 / ((d - 1) * (d + 1) ** 2) * _spread(observable, d)


def state_variance_haar(observable, d: int) -> float:
    """Exact ``E[(dC_s)^2]`` with Haar partition factors: ``2/(d(d+1)^2) * spread``.

    Derivation: with ``X = -i[rho_nu, psi psi^+]`` and ``p = |<nu|psi>|^2``,
    the quadratic corollary gives ``tr(X^2) * spread / (d^2 - 1)``, and
    ``E tr(X^2) = 2 E[p - p^2] = 2(d-1)/(d(d+1))``.
    """
    _need_two(d)
    return 2.0 / (d * (d + 1) ** 2) * _spread(observable, d)


def particle_number_observable(d: int) -> np.ndarray:
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return np.diag(np.arange(d - 1, -1, -1, dtype=float)).astype(np.complex128)


def particle_number_variance_reported(d: int) -> float:
    """Reference particle-number value ``(2d-3)/(3d+3)``."""
    _need_two(d)
    return (2 * d - 3) / (3 * d + 3)


def particle_number_variance_derived(d: int) -> float:
    """``state_variance`` of the number operator simplified: ``d/(6(d+1))``."""
    _need_two(d)
    return d / (6 * (d + 1))


def particle_number_variance_haar(d: int) -> float:
    """``state_variance_haar`` of the number operator: ``(d-1)/(6(d+1))``."""
    _need_two(d)
    return (d - 1) / (6 * (d + 1))


PARTICLE_NUMBER_CANDIDATES = {
    "particle_number_reported": particle_number_variance_reported,
    "particle_number_derived": particle_number_variance_derived,
    "particle_number_haar": particle_number_variance_haar,
}


def trace_modulus(target) -> float:
    return float(abs(np.trace(linalg.as_matrix(target))))


def gate_variance(target_trace_modulus, d: int) -> float:
    """Reference gate-cost prediction; accepts ``|tr U_t|`` or the target matrix."""
    _need_two(d)
    if np.ndim(target_trace_modulus) == 2:
        tau = trace_modulus(target_trace_modulus)
    else:
        tau = float(target_trace_modulus)
    if tau < 0 or tau > d * (1 + 1e-12):
        raise ValueError(f"|tr U_t| = {tau} outside [0, d]")
    denom = d**4 * (d * d - 1) ** 4
    poly = d**6 + d**5 - 4 * d**4 - 3 * d**3 + 5 * d**2 + 2 * d - 1
    return 2.0 * poly / denom + 2.0 * (tau**4 - 2 * tau**2) / denom


def gate_variance_haar(d: int) -> float:
    """Exact ``E[(dC_g)^2]`` with Haar partition factors: ``2/(d^4 (d+1))``.

    Independent of the target: ``W_B U_L U_t^+ U_R W_A`` is itself Haar.
    """
    _need_two(d)
    return 2.0 / (d**4 * (d + 1))


def qubit_bound(n_qubits: float, a: float) -> float:
    """Multi-qubit reference decay ``2^(-a n)``."""
    if not 0 < a < 1:
        raise ValueError("decay rate a must lie in (0, 1)")
    if n_qubits <= 0:
        raise ValueError("n_qubits must be positive")
    return 2.0 ** (-a * n_qubits)


def advantage_condition(observable, n_qubits: int, a: float) -> bool:
    """``tr(O^2) - 2^-n (tr O)^2 > 2^((3-a)n + 1)`` for a ``2^n``-dimensional observable.

    When it holds, ``state_variance`` (and ``state_variance_haar``) exceed
    ``qubit_bound(n, a)``.
    """
    o = linalg.as_matrix(observable)
    d = o.shape[0]
    if d != 2**n_qubits:
        raise ValueError(f"observable dimension {d} is not 2**{n_qubits}")
    if not 0.5 < a < 1:
        raise ValueError("decay rate a must lie in (0.5, 1)")
    return _spread(o, d) > 2.0 ** ((3 - a) * n_qubits + 1)


def crossover_dimension(qudit, bound, d_values) -> int | None:
    """Smallest ``d`` in ``d_values`` from which ``qudit(d) > bound(d)`` for every later ``d``."""
    ds = sorted(d_values)
    crossing = None
    for d in reversed(ds):
        if qudit(d) > bound(d):
            crossing = d
        else:
            break
    return crossing


def loglog_slope(d_values, values) -> tuple[float, float]:
    """OLS slope of ``log(values)`` against ``log(d)`` and its standard error."""
    x = np.log(np.asarray(d_values, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    if x.size < 2:
        raise ValueError("need at least two points")
    slope, intercept = np.polyfit(x, y, 1)
    if x.size == 2:
        return float(slope), 0.0
    resid = y - (slope * x + intercept)
    s2 = float(resid @ resid) / (x.size - 2)
    se = math.sqrt(s2 / float(((x - x.mean()) ** 2).sum()))
    return float(slope), se
