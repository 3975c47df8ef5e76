"""Exact Euclidean projections onto the constraint sets of the factorization.

Three sets appear in the model:

* the sub-simplex {x >= 0, sum(x) <= 1} (columns of H),
* its eps-shifted version {x >= -eps, sum(x) <= 1},
* the equality-constrained version {x >= -eps, sum(x) = 1} (columns of A).

All are handled by one sort-based kernel on the shifted problem; see
`_kernels`.  The backend is numba-compiled by default with a pure-numpy
fallback, selected by the NCAA_BACKEND environment variable ("numba",
"numpy" or "auto") or `set_backend`.
"""

import os
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError, ShapeError
from .linalg import as_vector

SUM_EQUALS_ONE = "equality-one"
SUM_AT_MOST_ONE = "at-most-one"

__all__ = [
    "SUM_EQUALS_ONE",
    "SUM_AT_MOST_ONE",
    "EpsSimplexSpec",
    "project_subsimplex",
    "project_eps_simplex",
    "project_columns",
    "set_backend",
    "active_backend",
]


@dataclass(frozen=True)
class EpsSimplexSpec:
    """Feasible set for one column: dimension, shift eps and sum mode."""

    dimension: int
    epsilon: float = 0.0
    sum_mode: str = SUM_AT_MOST_ONE

    def __post_init__(self):
        if self.dimension < 1:
            raise ConfigError("EpsSimplexSpec: dimension must be >= 1")
        if not (self.epsilon >= 0.0):
            raise ConfigError("EpsSimplexSpec: epsilon must be >= 0")
        if self.sum_mode not in (SUM_EQUALS_ONE, SUM_AT_MOST_ONE):
            raise ConfigError(f"EpsSimplexSpec: unknown sum mode {self.sum_mode!r}")


_BACKEND = None  # resolved lazily from the environment


def _resolve(name):
    if name in (None, "", "auto"):
        try:
            _kernels.get_numba_kernel()
            return "numba"
        except ImportError:
            return "numpy"
    if name == "numba":
        _kernels.get_numba_kernel()  # fail loudly if unavailable
        return "numba"
    if name == "numpy":
        return "numpy"
    raise ConfigError(f"unknown projection backend {name!r}")


def set_backend(name):
    """Force the kernel backend ("numba"/"numpy"/"auto"). Returns the choice."""
    global _BACKEND
    _BACKEND = _resolve(name)
    return _BACKEND


def active_backend():
    global _BACKEND
    if _BACKEND is None:
        _BACKEND = _resolve(os.environ.get("NCAA_BACKEND", "auto"))
    return _BACKEND


def _project_block(m, eps, equality):
    m = np.asfortranarray(m, dtype=np.float64)
    if active_backend() == "numba":
        out = np.empty(m.shape, dtype=np.float64, order="F")
        return _kernels.get_numba_kernel()(m, eps, equality, out)
    return _kernels.project_columns_numpy(m, eps, equality)


def project_subsimplex(x):
    """Euclidean projection onto {y >= 0, sum(y) <= 1}."""
    v = as_vector(x)
    return _project_block(v[:, None], 0.0, False)[:, 0]


def project_eps_simplex(x, spec):
    v = as_vector(x)
    if v.shape[0] != spec.dimension:
        raise ShapeError(
            f"project_eps_simplex: vector has length {v.shape[0]}, "
            f"spec dimension is {spec.dimension}"
        )
    equality = spec.sum_mode == SUM_EQUALS_ONE
    return _project_block(v[:, None], float(spec.epsilon), equality)[:, 0]


def project_columns(m, spec):
    """Project every column of `m` independently onto the spec's set."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError("project_columns: expected a 2-D array")
    if m.shape[0] != spec.dimension:
        raise ShapeError(
            f"project_columns: {m.shape[0]} rows but spec dimension "
            f"is {spec.dimension}"
        )
    equality = spec.sum_mode == SUM_EQUALS_ONE
    return _project_block(m, float(spec.epsilon), equality)
