"""Synthetic benchmark instances: random simplex factors plus calibrated noise.

One instance is X = max(0, W H + noise * ||WH||_F * N / ||N||_F) where the
columns of W are uniform draws normalized to sum one, the columns of H are
sparse Dirichlet draws resampled until every entry stays below the purity
level, and N is standard Gaussian.  Everything is reproducible per
(seed, trial) through independent counter-based streams.
"""

import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, GenerationError
from .linalg import fro_norm_sq, rng_stream
from .matio import save_matrix_binary

_MAX_RESAMPLES = 10**6

__all__ = ["SyntheticSpec", "SyntheticInstance", "dirichlet_column", "generate", "save_instance"]


@dataclass(frozen=True)
class SyntheticSpec:
    m: int = 10
    n: int = 1000
    r: int = 7
    purity: float = 1.0
    noise: float = 0.0
    dirichlet_alpha: float = 0.05
    trials: int = 25
    seed: int = 0

    def __post_init__(self):
        if self.m < 1 or self.n < 1 or self.r < 1:
            raise ConfigError("SyntheticSpec: dimensions must be >= 1")
        if not (0.0 < self.purity <= 1.0):
            raise ConfigError("SyntheticSpec: purity must lie in (0, 1]")
        if self.noise < 0.0:
            raise ConfigError("SyntheticSpec: noise must be >= 0")
        if self.dirichlet_alpha <= 0.0:
            raise ConfigError("SyntheticSpec: dirichlet_alpha must be > 0")


@dataclass
class SyntheticInstance:
    X: np.ndarray
    W_true: np.ndarray
    H_true: np.ndarray
    realized_purity: float


def dirichlet_column(alpha, r, rng):
    """One draw from the symmetric Dirichlet via normalized Gamma variates."""
    for _ in range(100):
        g = rng.gamma(alpha, size=r)
        s = g.sum()
        if s > 0.0:
            return g / s
    raise GenerationError("dirichlet_column: gamma draws underflowed to zero")


def generate(spec, trial):
    """Instance for one trial; bitwise reproducible per (spec.seed, trial)."""
    rng = rng_stream(spec.seed, trial)
    m, n, r = spec.m, spec.n, spec.r

    W = rng.uniform(size=(m, r))
    sums = W.sum(axis=0)
    while np.any(sums == 0.0):  # essentially impossible, but keep W valid
        W = rng.uniform(size=(m, r))
        sums = W.sum(axis=0)
    W = np.asfortranarray(W / sums)

    H = np.empty((r, n), order="F")
    for j in range(n):
        col = dirichlet_column(spec.dirichlet_alpha, r, rng)
        if spec.purity < 1.0:
            draws = 1
            while col.max() > spec.purity:
                if draws >= _MAX_RESAMPLES:
                    raise GenerationError(
                        f"generate: column {j} exceeded {_MAX_RESAMPLES} "
                        f"resamples at purity {spec.purity}"
                    )
                col = dirichlet_column(spec.dirichlet_alpha, r, rng)
                draws += 1
        H[:, j] = col

    Xt = W @ H
    if spec.noise > 0.0:
        N = rng.standard_normal((m, n))
        scale = spec.noise * np.sqrt(fro_norm_sq(Xt) / max(fro_norm_sq(N), 1e-300))
        X = np.maximum(Xt + scale * N, 0.0)
    else:
        X = Xt
    realized = float(H.max(axis=1).min())
    return SyntheticInstance(
        X=np.asfortranarray(X),
        W_true=W,
        H_true=H,
        realized_purity=realized,
    )


def save_instance(directory, spec, trial, inst, prefix="instance"):
    """Write X/W/H binaries plus a JSON sidecar recording spec and trial."""
    os.makedirs(directory, exist_ok=True)
    paths = {}
    for name, mat in (("X", inst.X), ("W_true", inst.W_true), ("H_true", inst.H_true)):
        fname = f"{prefix}_{name}.bin"
        save_matrix_binary(os.path.join(directory, fname), mat)
        paths[name] = fname
    sidecar = {
        "m": spec.m,
        "n": spec.n,
        "r": spec.r,
        "purity": spec.purity,
        "noise": spec.noise,
        "dirichlet_alpha": spec.dirichlet_alpha,
        "seed": spec.seed,
        "trial": int(trial),
        "realized_purity": inst.realized_purity,
        "files": paths,
    }
    meta_path = os.path.join(directory, f"{prefix}_meta.json")
    with open(meta_path, "w") as fh:
        json.dump(sidecar, fh, indent=1)
        fh.write("\n")
    return meta_path
