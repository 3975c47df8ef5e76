"""Comparison methods: minimum-volume NMF (logdet penalty) and plain SNPA.

MinVolNMF minimizes ||X - WH||_F^2 + lambda_t * logdet(W'W + delta*I) with
W >= 0 and H columns in the sub-simplex.  lambda_t balances the two terms
once at the SNPA initialization: lambda_t = lam * fit / |logdet|.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, NumericFailure
from .fpgm import UPDATE_H, FpgmConfig, fpgm_solve
from .linalg import as_matrix, fro_norm_sq, spectral_norm_sq_upper
from .projections import SUM_AT_MOST_ONE, EpsSimplexSpec
from .selection import snpa_select

__all__ = [
    "MinVolConfig",
    "logdet_penalty",
    "logdet_penalty_grad",
    "minvol_nmf",
    "snpa_unmix",
]


@dataclass
class MinVolConfig:
    lam: float = 0.1
    logdet_delta: float = 0.1
    max_iterations: int = 500
    inner_iterations: int = 100
    recompute_lambda: bool = False
    tolerance: float = 1e-10
    patience: int = 5

    def __post_init__(self):
        if self.lam <= 0.0:
            raise ConfigError("MinVolConfig: lambda must be > 0")
        if self.logdet_delta <= 0.0:
            raise ConfigError("MinVolConfig: logdet_delta must be > 0")
        if self.max_iterations < 1 or self.inner_iterations < 1:
            raise ConfigError("MinVolConfig: iteration counts must be >= 1")


def logdet_penalty(W, delta):
    """log det(W'W + delta*I); always finite for delta > 0."""
    W = np.asarray(W, dtype=np.float64)
    G = W.T @ W + delta * np.eye(W.shape[1])
    sign, val = np.linalg.slogdet(G)
    return float(val)


def logdet_penalty_grad(W, delta):
    """Gradient of logdet(W'W + delta*I): 2 W (W'W + delta*I)^{-1}."""
    W = np.asarray(W, dtype=np.float64)
    G = W.T @ W + delta * np.eye(W.shape[1])
    return 2.0 * np.linalg.solve(G, W.T).T


def _update_W(X, W, H, lam_t, delta, inner, shrink=0.5, grow=1.2):
    """Projected gradient on W >= 0 with backtracking; monotone in the full
    objective (data fit + weighted logdet)."""

    def full(Wc):
        return fro_norm_sq(X - Wc @ H) + lam_t * logdet_penalty(Wc, delta)

    HHt = H @ H.T
    XHt = X @ H.T
    L = max(2.0 * spectral_norm_sq_upper(H), 1e-12)
    step = 1.0 / L
    f_cur = full(W)
    for _ in range(inner):
        g = 2.0 * (W @ HHt - XHt) + lam_t * logdet_penalty_grad(W, delta)
        accepted = False
        for _ in range(60):
            Wn = np.maximum(W - step * g, 0.0)
            D = Wn - W
            model = f_cur + float(np.sum(g * D)) + fro_norm_sq(D) / (2.0 * step)
            fn = full(Wn)
            if fn <= model + 1e-12 * (abs(f_cur) + 1.0):
                accepted = True
                break
            step *= shrink
        if not accepted:
            break
        if fn > f_cur:  # non-convex penalty can still defeat the model test
            break
        W, f_cur = Wn, fn
        step *= grow
    return W, f_cur


def minvol_nmf(X, r, cfg=None, rng=None):
    """Alternating minimization of the volume-penalized objective.

    Initialization is SNPA columns plus a sub-simplex H fit; the balance
    lambda_t is computed there and frozen unless cfg.recompute_lambda.
    Returns (W, H, trace) where trace is the best objective value after each
    alternation (non-increasing by construction).
    """
    cfg = cfg if cfg is not None else MinVolConfig()
    X = as_matrix(X, "X")
    if X.min() < 0:
        raise DataError("minvol_nmf: X must be nonnegative")
    sel = snpa_select(X, r)
    if len(sel.indices) < r:
        raise DataError("minvol_nmf: SNPA exhausted the data before r picks")
    W = sel.Y.copy(order="F")
    n = X.shape[1]
    spec_h = EpsSimplexSpec(r, 0.0, SUM_AT_MOST_ONE)
    inner_cfg = FpgmConfig(max_inner=cfg.inner_iterations)
    H = np.full((r, n), 1.0 / r, order="F")
    H, _ = fpgm_solve(UPDATE_H, X, W, np.eye(r), H, spec_h, inner_cfg)

    def balance(Wc, Hc):
        fit = fro_norm_sq(X - Wc @ Hc)
        ld = logdet_penalty(Wc, cfg.logdet_delta)
        return cfg.lam * fit / max(abs(ld), 1e-12)

    lam_t = balance(W, H)

    def objective(Wc, Hc):
        return fro_norm_sq(X - Wc @ Hc) + lam_t * logdet_penalty(Wc, cfg.logdet_delta)

    obj = objective(W, H)
    best = (W.copy(order="F"), H.copy(order="F"), obj)
    trace = [obj]
    stall = 0
    for it in range(1, cfg.max_iterations + 1):
        if cfg.recompute_lambda:
            lam_t = balance(W, H)
        W, _ = _update_W(X, W, H, lam_t, cfg.logdet_delta, cfg.inner_iterations)
        H, _ = fpgm_solve(UPDATE_H, X, W, np.eye(r), H, spec_h, inner_cfg)
        obj = objective(W, H)
        if not math.isfinite(obj):
            raise NumericFailure("minvol_nmf: non-finite objective", iteration=it)
        if obj < best[2]:
            best = (W.copy(order="F"), H.copy(order="F"), obj)
        improved = trace[-1] - best[2]
        trace.append(best[2])
        if improved <= cfg.tolerance * (abs(best[2]) + 1e-30):
            stall += 1
            if stall >= cfg.patience:
                break
        else:
            stall = 0
    return best[0], best[1], trace


def snpa_unmix(X, r, inner_cfg=None):
    """SNPA as a complete unmixing baseline: W = picked columns, H = fit."""
    X = as_matrix(X, "X")
    sel = snpa_select(X, r)
    W = sel.Y.copy(order="F")
    k = W.shape[1]
    spec_h = EpsSimplexSpec(k, 0.0, SUM_AT_MOST_ONE)
    H = np.full((k, X.shape[1]), 1.0 / max(k, 1), order="F")
    H, _ = fpgm_solve(UPDATE_H, X, W, np.eye(k), H, spec_h, inner_cfg)
    return W, H
