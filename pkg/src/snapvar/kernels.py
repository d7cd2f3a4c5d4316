"""Backend selection for the hot loops.

The compiled Cython extension is used when it imports; otherwise the numpy
implementation in ``_pykernels`` is used. Set ``SNAPVAR_PURE_PYTHON=1`` to
force the fallback. ``BACKEND`` names the active one.
"""
from __future__ import annotations

import os

from snapvar import _pykernels

ConvergenceError = _pykernels.ConvergenceError

BACKENDS = {"python": _pykernels}

try:
    from snapvar import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None
else:
    BACKENDS["cython"] = _ckernels

if _ckernels is not None and os.environ.get("SNAPVAR_PURE_PYTHON") != "1":
    BACKEND = "cython"
else:
    BACKEND = "python"

_impl = BACKENDS[BACKEND]


def jacobi_eigh(h, rel_tol, max_sweeps):
    return _impl.jacobi_eigh(h, rel_tol, max_sweeps)


def state_grads(v, lam, alphas, thetas, k, nu, observable, psi0s, weights):
    return _impl.state_grads(v, lam, alphas, thetas, k, nu, observable, psi0s, weights)


def gate_grads(v, lam, alphas, thetas, k, nu, target):
    return _impl.gate_grads(v, lam, alphas, thetas, k, nu, target)
