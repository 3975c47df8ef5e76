"""Scoring: mean-removed spectral angle, optimal matching, report assembly."""

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DataError, MetricError, ShapeError
from .linalg import fro_norm_sq

__all__ = ["mrsa", "hungarian", "EvalReport", "evaluate"]


def mrsa(x, y):
    """Mean-removed spectral angle in [0, 100].

    0 means the vectors agree up to a positive scale and a constant shift;
    100 means they are anti-parallel after mean removal.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ShapeError("mrsa: inputs must be 1-D vectors of equal length")
    dx = x - x.mean()
    dy = y - y.mean()
    nx = float(np.linalg.norm(dx))
    ny = float(np.linalg.norm(dy))
    if nx == 0.0 or ny == 0.0:
        raise MetricError("mrsa is undefined for constant vectors")
    c = float(np.dot(dx, dy) / (nx * ny))
    c = min(1.0, max(-1.0, c))
    return 100.0 / math.pi * math.acos(c)


def hungarian(cost):
    """Permutation p minimizing sum(cost[i, p[i]])."""
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ShapeError("hungarian: cost matrix must be square")
    if not np.all(np.isfinite(cost)):
        raise DataError("hungarian: cost entries must be finite")
    _, col = linear_sum_assignment(cost)
    return col


@dataclass
class EvalReport:
    assignment: list
    mrsa_per_pair: list
    mrsa_average: float
    rel_error: float
    method_tag: str = ""
    wall_time: float = 0.0

    def to_json_dict(self):
        return {
            "method": self.method_tag,
            "assignment": [int(i) for i in self.assignment],
            "mrsa_per_pair": [float(v) for v in self.mrsa_per_pair],
            "mrsa_average": float(self.mrsa_average),
            "rel_error": None if math.isnan(self.rel_error) else float(self.rel_error),
            "wall_time_s": float(self.wall_time),
        }

    def to_json(self):
        return json.dumps(self.to_json_dict(), indent=1)

    @staticmethod
    def csv_header():
        return "method,mrsa_average,rel_error,wall_time_s,assignment,mrsa_per_pair"

    def to_csv_row(self):
        rel = "" if math.isnan(self.rel_error) else repr(float(self.rel_error))
        return ",".join(
            [
                self.method_tag,
                repr(float(self.mrsa_average)),
                rel,
                repr(float(self.wall_time)),
                " ".join(str(int(i)) for i in self.assignment),
                " ".join(repr(float(v)) for v in self.mrsa_per_pair),
            ]
        )


def evaluate(W_est, W_true, X=None, X_hat=None, method_tag="", wall_time=0.0):
    """Match estimated to true archetypes and score the factorization.

    The r x r cost matrix holds pairwise MRSA values; the optimal assignment
    yields per-pair scores and their average.  If X and X_hat are given the
    relative reconstruction error is included, else it is NaN.
    """
    W_est = np.asarray(W_est, dtype=np.float64)
    W_true = np.asarray(W_true, dtype=np.float64)
    if W_est.shape != W_true.shape:
        raise ShapeError(
            f"evaluate: shapes differ ({W_est.shape} vs {W_true.shape})"
        )
    r = W_true.shape[1]
    cost = np.empty((r, r))
    for i in range(r):
        for j in range(r):
            cost[i, j] = mrsa(W_true[:, i], W_est[:, j])
    perm = hungarian(cost)
    pairs = cost[np.arange(r), perm]
    if X is not None and X_hat is not None:
        denom = math.sqrt(fro_norm_sq(X))
        if denom == 0.0:
            raise MetricError("relative error is undefined for a zero matrix")
        rel = math.sqrt(fro_norm_sq(np.asarray(X) - np.asarray(X_hat))) / denom
    else:
        rel = math.nan
    return EvalReport(
        assignment=[int(p) for p in perm],
        mrsa_per_pair=[float(v) for v in pairs],
        mrsa_average=float(pairs.mean()),
        rel_error=rel,
        method_tag=method_tag,
        wall_time=wall_time,
    )
