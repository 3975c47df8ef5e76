"""Fast projected gradient method (Nesterov acceleration + backtracking).

Solves the three quadratic subproblems of the block coordinate descent:
update all of A with H fixed, update H with A fixed, or update a single
column of A.  Each subproblem is reduced to its Gram form once per call, so
inner iterations cost O(d^2 r + d r^2) or O(r^2 n) instead of O(mn*).

The returned iterate is the best one seen (Nesterov steps are not monotone),
which guarantees objective(result) <= objective(warm start).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericFailure, ShapeError
from .linalg import fro_norm_sq, spectral_norm_sq_upper
from .projections import project_columns

UPDATE_A = "update-A"
UPDATE_H = "update-H"
UPDATE_A_COLUMN = "update-A-single-column"

__all__ = [
    "UPDATE_A",
    "UPDATE_H",
    "UPDATE_A_COLUMN",
    "FpgmConfig",
    "grad_A",
    "grad_H",
    "fpgm_solve",
]


@dataclass
class FpgmConfig:
    """Knobs of the inner solver.

    `tolerance` stops the loop once the best objective has not improved by a
    relative `tolerance` for `patience` consecutive iterations.  `accelerate`
    switches Nesterov extrapolation off, which turns the method into plain
    projected gradient (used by tests as a reference).
    """

    max_inner: int = 200
    backtrack_shrink: float = 0.5
    backtrack_grow: float = 1.2
    restart_on_increase: bool = True
    tolerance: float = 1e-9
    patience: int = 5
    accelerate: bool = True

    def __post_init__(self):
        if self.max_inner < 1:
            raise ConfigError("FpgmConfig: max_inner must be >= 1")
        if not (0.0 < self.backtrack_shrink < 1.0 < self.backtrack_grow):
            raise ConfigError(
                "FpgmConfig: need 0 < backtrack_shrink < 1 < backtrack_grow"
            )
        if self.tolerance < 0.0 or self.patience < 1:
            raise ConfigError("FpgmConfig: tolerance >= 0 and patience >= 1")


def _check_shapes(X, Y, A, H):
    m, n = X.shape
    if Y.shape[0] != m:
        raise ShapeError(f"Y has {Y.shape[0]} rows, X has {m}")
    if A.shape[0] != Y.shape[1]:
        raise ShapeError(f"A has {A.shape[0]} rows, Y has {Y.shape[1]} columns")
    if H.shape[0] != A.shape[1]:
        raise ShapeError(f"H has {H.shape[0]} rows, A has {A.shape[1]} columns")
    if H.shape[1] != n:
        raise ShapeError(f"H has {H.shape[1]} columns, X has {n}")


def grad_A(X, Y, A, H):
    """Gradient of ||X - YAH||_F^2 with respect to A."""
    X, Y, A, H = (np.asarray(v, dtype=np.float64) for v in (X, Y, A, H))
    _check_shapes(X, Y, A, H)
    R = Y @ A @ H - X
    return 2.0 * (Y.T @ R) @ H.T


def grad_H(X, Y, A, H):
    """Gradient of ||X - YAH||_F^2 with respect to H."""
    X, Y, A, H = (np.asarray(v, dtype=np.float64) for v in (X, Y, A, H))
    _check_shapes(X, Y, A, H)
    W = Y @ A
    return 2.0 * W.T @ (W @ H - X)


def _quadratic_update_A(X, Y, H):
    G = Y.T @ Y
    M = H @ H.T
    C = (Y.T @ X) @ H.T
    c0 = fro_norm_sq(X)
    L = 2.0 * spectral_norm_sq_upper(Y) * spectral_norm_sq_upper(H)

    def fg(V):
        T = (G @ V) @ M
        f = c0 - 2.0 * float(np.sum(V * C)) + float(np.sum(T * V))
        return f, 2.0 * (T - C)

    def obj(V):
        T = (G @ V) @ M
        return c0 - 2.0 * float(np.sum(V * C)) + float(np.sum(T * V))

    return obj, fg, L


def _quadratic_update_H(X, W):
    G = W.T @ W
    C = W.T @ X
    c0 = fro_norm_sq(X)
    L = 2.0 * spectral_norm_sq_upper(W)

    def fg(V):
        T = G @ V
        f = c0 - 2.0 * float(np.sum(V * C)) + float(np.sum(T * V))
        return f, 2.0 * (T - C)

    def obj(V):
        T = G @ V
        return c0 - 2.0 * float(np.sum(V * C)) + float(np.sum(T * V))

    return obj, fg, L


def _quadratic_update_A_column(X, Y, A, H, col):
    h = H[col, :]
    P = A @ H
    P = P - np.outer(A[:, col], h)
    R = X - Y @ P
    G = Y.T @ Y
    s = float(h @ h)
    C = (Y.T @ (R @ h))[:, None]
    c0 = fro_norm_sq(R)
    L = 2.0 * spectral_norm_sq_upper(Y) * s

    def fg(V):
        T = G @ V
        f = c0 - 2.0 * float(np.sum(V * C)) + s * float(np.sum(T * V))
        return f, 2.0 * (s * T - C)

    def obj(V):
        T = G @ V
        return c0 - 2.0 * float(np.sum(V * C)) + s * float(np.sum(T * V))

    return obj, fg, L


def _backtrack(obj, project, Z, fZ, gZ, step, cfg):
    slack = 1e-12 * (abs(fZ) + 1.0)
    for _ in range(64):
        Vn = project(Z - step * gZ)
        D = Vn - Z
        model = fZ + float(np.sum(gZ * D)) + fro_norm_sq(D) / (2.0 * step)
        fn = obj(Vn)
        if fn <= model + slack:
            return Vn, fn, step
        step *= cfg.backtrack_shrink
    return Vn, fn, step


def _engine(obj, fg, project, V0, L, cfg):
    L = max(L, 1e-12)
    V = project(V0)
    f_cur = obj(V)
    if not math.isfinite(f_cur):
        raise NumericFailure("non-finite objective at the warm start", iteration=0)
    best_V, best_f = V, f_cur
    V_prev = V
    t_prev = 1.0
    step = 1.0 / L
    stall = 0
    for it in range(1, cfg.max_inner + 1):
        if cfg.accelerate:
            t = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_prev * t_prev))
            beta = (t_prev - 1.0) / t
        else:
            t = 1.0
            beta = 0.0
        Z = V + beta * (V - V_prev) if beta != 0.0 else V
        fZ, gZ = fg(Z)
        Vn, fn, step = _backtrack(obj, project, Z, fZ, gZ, step, cfg)
        if not math.isfinite(fn):
            raise NumericFailure("non-finite objective", iteration=it)
        if cfg.restart_on_increase and beta != 0.0 and fn > f_cur:
            # extrapolation overshot: drop the momentum and step from V
            t = 1.0
            fZ, gZ = fg(V)
            Vn, fn, step = _backtrack(obj, project, V, fZ, gZ, step, cfg)
            if not math.isfinite(fn):
                raise NumericFailure("non-finite objective", iteration=it)
        improved = best_f - fn
        if fn < best_f:
            best_V, best_f = Vn, fn
        V_prev = V
        V = Vn
        f_cur = fn
        t_prev = t
        if improved <= cfg.tolerance * (abs(best_f) + 1e-30):
            stall += 1
            if stall >= cfg.patience:
                break
        else:
            stall = 0
        step *= cfg.backtrack_grow
    return best_V, best_f


def fpgm_solve(kind, X, Y, fixed, warm_start, constraint, cfg=None, column=None):
    """Solve one BCD subproblem; returns (updated factor, final objective).

    `fixed` is H for the A-updates and A for the H-update.  For
    `UPDATE_A_COLUMN`, `warm_start` is the full A and `column` names the
    column being optimized; the returned matrix is the full A with that
    column replaced.  The objective is always the full squared residual of
    the subproblem, so it is comparable across calls.
    """
    cfg = cfg if cfg is not None else FpgmConfig()
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    fixed = np.asarray(fixed, dtype=np.float64)
    warm = np.asfortranarray(warm_start, dtype=np.float64)

    def project(V):
        return project_columns(V, constraint)

    if kind == UPDATE_A:
        _check_shapes(X, Y, warm, fixed)
        if constraint.dimension != Y.shape[1]:
            raise ShapeError("constraint dimension must equal Y's column count")
        obj, fg, L = _quadratic_update_A(X, Y, fixed)
        return _engine(obj, fg, project, warm, L, cfg)

    if kind == UPDATE_H:
        _check_shapes(X, Y, fixed, warm)
        if constraint.dimension != fixed.shape[1]:
            raise ShapeError("constraint dimension must equal A's column count")
        W = Y @ fixed
        obj, fg, L = _quadratic_update_H(X, W)
        return _engine(obj, fg, project, warm, L, cfg)

    if kind == UPDATE_A_COLUMN:
        if column is None:
            raise ConfigError("fpgm_solve: column index required for " + kind)
        _check_shapes(X, Y, warm, fixed)
        if constraint.dimension != Y.shape[1]:
            raise ShapeError("constraint dimension must equal Y's column count")
        obj, fg, L = _quadratic_update_A_column(X, Y, warm, fixed, column)
        v, f = _engine(obj, fg, project, warm[:, [column]], L, cfg)
        out = warm.copy(order="F")
        out[:, column] = v[:, 0]
        return out, f

    raise ConfigError(f"fpgm_solve: unknown subproblem kind {kind!r}")
