"""Qudit SNAP-displacement circuits and gradient-variance analysis."""

__version__ = "0.1.0"

from snapvar.kernels import BACKEND  # noqa: E402

__all__ = ["BACKEND", "__version__"]
