"""Near-convex archetypal analysis: model, BCD blocks, radius tuning.

The model approximates a nonnegative X as Y @ A @ H where each column of A
sums to one with entries allowed down to -eps (a near-convex combination of
the anchor columns Y), and each column of H lies in the sub-simplex.  The
radius eps is tuned by an outer doubling/bisection loop around 50-round BCD
blocks; an optional fine-tuning pass then shrinks a per-column radius eps_l
as far as a 1% error budget allows.
"""

import base64
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .fpgm import UPDATE_A, UPDATE_A_COLUMN, UPDATE_H, FpgmConfig, fpgm_solve
from .linalg import as_matrix, column_mean, fro_norm_sq
from .matio import matrix_from_bytes, matrix_to_bytes, load_matrix_binary, save_matrix_binary
from .projections import (
    SUM_AT_MOST_ONE,
    SUM_EQUALS_ONE,
    EpsSimplexSpec,
    project_columns,
)
from .selection import snpa_select

__all__ = [
    "TunerConfig",
    "NcaaModel",
    "residual_sq",
    "init_factors",
    "bcd_block",
    "tune_epsilon",
    "fine_tune",
    "expand_to_Z",
    "archetypes",
    "save_model",
    "load_model",
]


@dataclass
class TunerConfig:
    """Every numeric default of the solver in one place."""

    eps_min: float = 1e-3
    eps_max: float = 0.5
    delta: float = 1e-4
    block_size: int = 50
    max_outer: int = 20
    eps_gap_tol: float = 1e-4
    fine_alpha: float = 0.8
    fine_budget: float = 1.01
    fine_max_rounds: int = 50
    fpgm: FpgmConfig = field(default_factory=FpgmConfig)

    def __post_init__(self):
        if not (0.0 < self.eps_min < self.eps_max):
            raise ConfigError("TunerConfig: need 0 < eps_min < eps_max")
        if not (0.0 < self.fine_alpha < 1.0):
            raise ConfigError("TunerConfig: need 0 < fine_alpha < 1")
        if not (self.fine_budget > 1.0):
            raise ConfigError("TunerConfig: need fine_budget > 1")
        if self.block_size < 1 or self.max_outer < 1 or self.fine_max_rounds < 1:
            raise ConfigError("TunerConfig: iteration counts must be >= 1")
        if self.delta < 0.0 or self.eps_gap_tol <= 0.0:
            raise ConfigError("TunerConfig: need delta >= 0 and eps_gap_tol > 0")


@dataclass
class NcaaModel:
    """A fitted factorization X ~ Y A H.

    `epsilons[l]` is the near-convexity radius of column l of A.
    `error_trace` holds (block index, best squared error seen so far) pairs;
    the running-best convention matches the returned factors, which are the
    best iterate of the whole run, and keeps the trace non-increasing even
    when a shrinking radius forces a re-projection.  `epsilon_trace` lists
    the radii probed by the outer loop.
    """

    Y: np.ndarray
    A: np.ndarray
    H: np.ndarray
    epsilons: np.ndarray
    error_trace: list = field(default_factory=list)
    epsilon_trace: list = field(default_factory=list)

    @property
    def rank(self):
        return self.A.shape[1]

    def archetypes(self):
        return np.asfortranarray(self.Y @ self.A)

    def reconstruction(self):
        return np.asfortranarray(self.Y @ (self.A @ self.H))

    def validate(self, tol_sum=1e-9, tol_low=1e-10):
        col_sums = self.A.sum(axis=0)
        if np.max(np.abs(col_sums - 1.0)) > tol_sum:
            raise AssertionError("columns of A must sum to one")
        lows = self.A.min(axis=0)
        if np.any(lows < -np.asarray(self.epsilons) - tol_low):
            raise AssertionError("entries of A violate their per-column radius")
        if self.H.min() < -tol_low or np.max(self.H.sum(axis=0)) > 1.0 + tol_low:
            raise AssertionError("columns of H must lie in the sub-simplex")
        errs = [e for _, e in self.error_trace]
        if any(b > a * (1.0 + 1e-12) + 1e-300 for a, b in zip(errs, errs[1:])):
            raise AssertionError("error trace must be non-increasing")
        return True


def residual_sq(X, Y, A, H):
    """Squared Frobenius residual ||X - YAH||_F^2 (full form, no Gram trick)."""
    return fro_norm_sq(X - Y @ (A @ H))


def _h_spec(r):
    return EpsSimplexSpec(r, 0.0, SUM_AT_MOST_ONE)


def _a_spec(d, eps):
    return EpsSimplexSpec(d, eps, SUM_EQUALS_ONE)


def init_factors(X, Y, r, rng=None, fpgm_cfg=None):
    """Initial (A0, H0): A0 selects r columns of Y via SNPA on Y itself.

    A0 is a 0/1 column-selection matrix (feasible for any eps >= 0); H0 is a
    sub-simplex fit warm-started from the uniform 1/r matrix.
    """
    X = as_matrix(X, "X")
    Y = as_matrix(Y, "Y")
    d = Y.shape[1]
    if d < r:
        raise ConfigError(f"init_factors: Y has {d} columns but rank is {r}")
    sel = snpa_select(np.maximum(Y, 0.0), r)
    idx = list(sel.indices)
    if len(idx) < r:
        # degenerate Y: top up with the lowest unused indices
        unused = [j for j in range(d) if j not in idx]
        idx += unused[: r - len(idx)]
    A0 = np.zeros((d, r), order="F")
    for k, j in enumerate(idx):
        A0[j, k] = 1.0
    H0 = np.full((r, X.shape[1]), 1.0 / r, order="F")
    H0, _ = fpgm_solve(UPDATE_H, X, Y, A0, H0, _h_spec(r), fpgm_cfg)
    return A0, H0


def bcd_block(X, Y, A, H, eps, block_size, fpgm_cfg=None):
    """Run `block_size` alternations of (A update, H update) at a fixed eps.

    Returns the updated factors and the squared error after each round.  A
    round that would raise the full-form error (only possible through float
    noise or a fresh re-projection) is rolled back, so the returned trace is
    exactly non-increasing.
    """
    d = Y.shape[1]
    r = A.shape[1]
    spec_a = _a_spec(d, eps)
    spec_h = _h_spec(r)
    A = project_columns(A, spec_a)
    err_prev = residual_sq(X, Y, A, H)
    errs = []
    for _ in range(block_size):
        A_new, _ = fpgm_solve(UPDATE_A, X, Y, H, A, spec_a, fpgm_cfg)
        H_new, _ = fpgm_solve(UPDATE_H, X, Y, A_new, H, spec_h, fpgm_cfg)
        err = residual_sq(X, Y, A_new, H_new)
        if err <= err_prev:
            A, H, err_prev = A_new, H_new, err
        errs.append(err_prev)
    return A, H, errs


def tune_epsilon(X, Y, r, cfg=None, rng=None):
    """Outer radius search (doubling while the error improves, else bisection).

    Starts at eps_min; after each block the improvement over the previous
    block end is compared against delta * err(0).  Too little improvement
    marks the current eps as an upper bound and bisects, otherwise eps
    doubles (capped).  Stops once the bracket collapses or max_outer blocks
    ran.  The returned model is the best-error iterate of the whole run.
    """
    cfg = cfg if cfg is not None else TunerConfig()
    X = as_matrix(X, "X")
    Y = as_matrix(Y, "Y")
    A, H = init_factors(X, Y, r, rng, cfg.fpgm)
    err0 = residual_sq(X, Y, A, H)
    zero_floor = 1e-14 * max(fro_norm_sq(X), 1e-300)

    lo = cfg.eps_min
    hi = cfg.eps_max
    eps = cfg.eps_min
    best_err = err0
    best = (A.copy(order="F"), H.copy(order="F"), eps)
    error_trace = [(0, err0)]
    epsilon_trace = []
    prev_end = err0
    for outer in range(1, cfg.max_outer + 1):
        epsilon_trace.append((outer, eps))
        A, H, errs = bcd_block(X, Y, A, H, eps, cfg.block_size, cfg.fpgm)
        end_err = errs[-1]
        if end_err < best_err:
            best_err = end_err
            best = (A.copy(order="F"), H.copy(order="F"), eps)
        error_trace.append((outer, best_err))
        stalled = (prev_end - end_err) < cfg.delta * err0 or end_err <= zero_floor
        if stalled:
            hi = eps
            nxt = 0.5 * (lo + hi)
        else:
            lo = eps
            nxt = min(2.0 * eps, hi)
        prev_end = end_err
        if hi - lo < cfg.eps_gap_tol * hi:
            break
        eps = nxt

    A_best, H_best, eps_best = best
    return NcaaModel(
        Y=Y,
        A=A_best,
        H=H_best,
        epsilons=np.full(r, eps_best),
        error_trace=error_trace,
        epsilon_trace=epsilon_trace,
    )


def fine_tune(X, Y, model, cfg=None):
    """Shrink each column radius independently within the 1% error budget.

    For each column l (others fixed at the tuned result) the radius starts
    at -min(A(:,l)) (clamped to [0, eps]) and is multiplied by fine_alpha;
    after every shrink a block of single-column A updates alternated with
    full H updates re-fits, and the last column meeting the error budget is
    kept.  Ends with a full H re-solve.  If the combined shrunk columns
    overshoot the budget (they were tuned independently), everything reverts
    to the input factors, which satisfy the budget by construction.
    """
    cfg = cfg if cfg is not None else TunerConfig()
    X = as_matrix(X, "X")
    Y = as_matrix(Y, "Y")
    A = np.asfortranarray(model.A)
    H_work = np.asfortranarray(model.H).copy(order="F")
    d, r = A.shape
    spec_h = _h_spec(r)
    err0 = residual_sq(X, Y, A, model.H)
    budget = cfg.fine_budget * err0
    eps_cap = float(np.max(model.epsilons))

    A_star = A.copy(order="F")
    eps_start = np.minimum(np.maximum(-A.min(axis=0), 0.0), eps_cap)
    new_eps = eps_start.copy()
    accepted_err = np.full(r, -np.inf)  # budget consumed per accepted column
    for l in range(r):
        eps0 = float(eps_start[l])
        if eps0 <= 1e-15:
            continue  # column already (near) nonnegative: nothing to shrink
        B = A.copy(order="F")
        eps_l = eps0
        accepted_col = A[:, l].copy()
        accepted_eps = eps0
        for _ in range(cfg.fine_max_rounds):
            eps_l = cfg.fine_alpha * eps_l
            spec_l = _a_spec(d, eps_l)
            B[:, l] = project_columns(B[:, [l]], spec_l)[:, 0]
            for _ in range(cfg.block_size):
                B, _ = fpgm_solve(
                    UPDATE_A_COLUMN, X, Y, H_work, B, spec_l, cfg.fpgm, column=l
                )
                H_work, _ = fpgm_solve(UPDATE_H, X, Y, B, H_work, spec_h, cfg.fpgm)
            err = residual_sq(X, Y, B, H_work)
            if err > budget:
                break
            accepted_col = B[:, l].copy()
            accepted_eps = eps_l
            accepted_err[l] = err
        A_star[:, l] = accepted_col
        new_eps[l] = accepted_eps

    # the columns were tuned independently, so their combination can overshoot
    # the budget; revert the most budget-hungry shrinks until it holds again
    H_star, _ = fpgm_solve(UPDATE_H, X, Y, A_star, H_work, spec_h, cfg.fpgm)
    err_final = residual_sq(X, Y, A_star, H_star)
    order = sorted(range(r), key=lambda l: -accepted_err[l])
    for l in order:
        if err_final <= budget:
            break
        if new_eps[l] == eps_start[l]:
            continue
        A_star[:, l] = A[:, l]
        new_eps[l] = eps_start[l]
        H_star, _ = fpgm_solve(UPDATE_H, X, Y, A_star, H_star, spec_h, cfg.fpgm)
        err_final = residual_sq(X, Y, A_star, H_star)
    if err_final > budget:
        # everything reverted yet still over: re-solve H from the tuned model,
        # whose warm start meets the budget by definition
        A_star = A.copy(order="F")
        new_eps = eps_start.copy()
        H_star, _ = fpgm_solve(
            UPDATE_H, X, Y, A_star, np.asfortranarray(model.H), spec_h, cfg.fpgm
        )
    return NcaaModel(
        Y=Y,
        A=A_star,
        H=np.asfortranarray(H_star),
        epsilons=new_eps,
        error_trace=list(model.error_trace),
        epsilon_trace=list(model.epsilon_trace),
    )


def expand_to_Z(Y, eps):
    """Vertices of the near-convex hull: Z_j = Y_j + d*eps*(Y_j - mean(Y))."""
    Y = as_matrix(Y, "Y")
    if eps < 0:
        raise ConfigError("expand_to_Z: eps must be >= 0")
    if eps == 0.0:
        return Y.copy(order="F")
    d = Y.shape[1]
    ybar = column_mean(Y)
    return np.asfortranarray(Y + (d * eps) * (Y - ybar[:, None]))


def archetypes(model):
    return model.archetypes()


def _encode_matrix(a, name, directory, embed):
    if embed:
        return {
            "rows": int(a.shape[0]),
            "cols": int(a.shape[1]),
            "encoding": "base64",
            "data": base64.b64encode(matrix_to_bytes(a)).decode("ascii"),
        }
    fname = f"{name}.bin"
    save_matrix_binary(os.path.join(directory, fname), a)
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "encoding": "file",
        "path": fname,
    }


def save_model(model, path, embed=False):
    """Write the model as JSON; matrices embedded base64 or as .bin siblings."""
    directory = os.path.dirname(os.path.abspath(path))
    doc = {
        "format": "ncaa-model",
        "version": 1,
        "rank": int(model.rank),
        "epsilons": [float(e) for e in model.epsilons],
        "error_trace": [[int(i), float(e)] for i, e in model.error_trace],
        "epsilon_trace": [[int(i), float(e)] for i, e in model.epsilon_trace],
        "matrices": {
            "Y": _encode_matrix(model.Y, "Y", directory, embed),
            "A": _encode_matrix(model.A, "A", directory, embed),
            "H": _encode_matrix(model.H, "H", directory, embed),
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _decode_matrix(entry, directory, name):
    if entry["encoding"] == "base64":
        a = matrix_from_bytes(base64.b64decode(entry["data"]), name=name)
    else:
        a = load_matrix_binary(os.path.join(directory, entry["path"]))
    if a.shape != (entry["rows"], entry["cols"]):
        raise ConfigError(f"model matrix {name}: shape header disagrees with payload")
    return a


def load_model(path):
    directory = os.path.dirname(os.path.abspath(path))
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != "ncaa-model" or doc.get("version") != 1:
        raise ConfigError(f"{path}: not a version-1 model file")
    mats = doc["matrices"]
    return NcaaModel(
        Y=_decode_matrix(mats["Y"], directory, "Y"),
        A=_decode_matrix(mats["A"], directory, "A"),
        H=_decode_matrix(mats["H"], directory, "H"),
        epsilons=np.asarray(doc["epsilons"], dtype=np.float64),
        error_trace=[(int(i), float(e)) for i, e in doc["error_trace"]],
        epsilon_trace=[(int(i), float(e)) for i, e in doc["epsilon_trace"]],
    )
