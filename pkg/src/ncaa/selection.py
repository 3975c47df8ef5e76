"""Anchor selection: pick d columns of X to span the archetypes.

Two schemes: SNPA-style greedy extreme-point extraction, and a divisive
hierarchical clustering that returns one representative data column per
cluster.  Both are deterministic for fixed inputs.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError
from .fpgm import UPDATE_H, FpgmConfig, fpgm_solve
from .linalg import as_matrix
from .projections import SUM_AT_MOST_ONE, EpsSimplexSpec

__all__ = ["SelectionResult", "snpa_select", "hc_select"]

# residual mass (relative to the strongest initial column) below which the
# greedy loop considers the data exhausted
_EXHAUSTED_REL = 1e-24


@dataclass
class SelectionResult:
    indices: list
    Y: np.ndarray
    method: str
    exhausted: bool = False
    step_norms: list = field(default_factory=list)


def snpa_select(X, d, keep_step_norms=False, inner_iterations=100):
    """Greedy extreme-column selection with simplex-projected residuals.

    At each step the column with the largest residual norm is picked, then
    the residual is refreshed by fitting X over the picked columns with
    sub-simplex constraints.
    """
    X = as_matrix(X, "X")
    m, n = X.shape
    if d > n:
        raise ConfigError(f"snpa_select: d={d} exceeds the {n} available columns")
    if d < 1:
        raise ConfigError("snpa_select: d must be >= 1")
    if X.min() < 0:
        raise DataError("snpa_select: X must be nonnegative")

    cfg = FpgmConfig(max_inner=inner_iterations)
    norms0 = np.sum(X * X, axis=0)
    floor = _EXHAUSTED_REL * max(float(norms0.max()), 1e-300)
    picked = []
    H = None
    step_norms = []
    exhausted = False
    for _ in range(d):
        if picked:
            R = X - X[:, picked] @ H
            norms = np.sum(R * R, axis=0)
        else:
            norms = norms0.copy()
        avail = norms.copy()
        if picked:
            avail[picked] = -np.inf
        j = int(np.argmax(avail))
        if norms[j] <= floor:
            exhausted = True
            break
        if keep_step_norms:
            step_norms.append(norms)
        picked.append(j)
        s = len(picked)
        Xs = np.asfortranarray(X[:, picked])
        if H is None:
            warm = np.full((1, n), 0.5, order="F")
        else:
            warm = np.vstack([H, np.zeros((1, n))])
        spec = EpsSimplexSpec(s, 0.0, SUM_AT_MOST_ONE)
        H, _ = fpgm_solve(UPDATE_H, X, Xs, np.eye(s), warm, spec, cfg)
    Y = np.asfortranarray(X[:, picked])
    return SelectionResult(
        indices=picked,
        Y=Y,
        method="snpa",
        exhausted=exhausted,
        step_norms=step_norms,
    )


def _two_factor_split(M):
    """Assign each column of M to the dominant factor of a rank-2 fit.

    The two basis columns are seeded with the column farthest from the
    centroid and the column farthest from that one, then refined by a short
    alternating nonnegative least-squares loop.
    """
    m, k = M.shape
    centroid = M.mean(axis=1)
    dist_c = np.sum((M - centroid[:, None]) ** 2, axis=0)
    i1 = int(np.argmax(dist_c))
    dist_1 = np.sum((M - M[:, [i1]]) ** 2, axis=0)
    i2 = int(np.argmax(dist_1))
    if dist_1[i2] <= 0.0:
        return None  # all columns identical
    W = np.column_stack([M[:, i1], M[:, i2]])
    H = np.full((2, k), 0.5)
    for _ in range(25):
        G = W.T @ W
        L = max(float(np.trace(G)), 1e-12)
        C = W.T @ M
        for _ in range(30):
            H = np.maximum(H - (G @ H - C) / L, 0.0)
        Gh = H @ H.T
        Lh = max(float(np.trace(Gh)), 1e-12)
        Ch = M @ H.T
        for _ in range(30):
            W = np.maximum(W - (W @ Gh - Ch) / Lh, 0.0)
    labels = np.argmax(H, axis=0)
    if labels.min() == labels.max():
        # dominance did not separate anything; split by nearest seed instead
        labels = (dist_1 < dist_c).astype(int)
        if labels.min() == labels.max():
            return None
    return labels


def hc_select(X, d, rng=None):
    """Divisive hierarchical clustering; one representative column per cluster.

    The largest cluster is split in two with a rank-2 factorization until d
    clusters exist; each representative is the genuine data column closest
    to its cluster centroid.
    """
    X = as_matrix(X, "X")
    m, n = X.shape
    if d > n:
        raise ConfigError(f"hc_select: d={d} exceeds the {n} available columns")
    if d < 1:
        raise ConfigError("hc_select: d must be >= 1")

    clusters = [np.arange(n)]
    frozen = set()
    while len(clusters) < d:
        order = sorted(
            (i for i in range(len(clusters)) if i not in frozen),
            key=lambda i: -len(clusters[i]),
        )
        target = next((i for i in order if len(clusters[i]) > 1), None)
        if target is None:
            break
        idx = clusters[target]
        labels = _two_factor_split(X[:, idx])
        if labels is None:
            frozen.add(target)
            continue
        a = idx[labels == 0]
        b = idx[labels == 1]
        clusters[target] = a
        clusters.append(b)
        frozen = set()  # sizes changed; reconsider everything
    while len(clusters) < d:
        # only degenerate (all-identical) clusters remain: split by halving
        i = max(range(len(clusters)), key=lambda i: len(clusters[i]))
        idx = clusters[i]
        half = len(idx) // 2
        clusters[i] = idx[:half]
        clusters.append(idx[half:])

    reps = []
    for idx in clusters:
        sub = X[:, idx]
        centroid = sub.mean(axis=1)
        dist = np.sum((sub - centroid[:, None]) ** 2, axis=0)
        reps.append(int(idx[int(np.argmin(dist))]))
    Y = np.asfortranarray(X[:, reps])
    return SelectionResult(indices=[], Y=Y, method="hc")
