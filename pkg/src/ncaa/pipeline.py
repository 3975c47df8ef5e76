"""Orchestration shared by the CLI and the benchmark harness."""

import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .baselines import MinVolConfig, minvol_nmf, snpa_unmix
from .errors import ConfigError, NcaaError
from .evaluation import evaluate
from .selection import hc_select, snpa_select
from .solver import TunerConfig, fine_tune, tune_epsilon
from .synthdata import SyntheticSpec, generate

__all__ = ["select_anchors", "fit_ncaa", "run_method", "bench_run", "aggregate_rows"]


def select_anchors(X, d, method="snpa", rng=None):
    if method == "snpa":
        return snpa_select(X, d)
    if method == "hc":
        return hc_select(X, d, rng)
    raise ConfigError(f"unknown selector {method!r} (expected snpa or hc)")


def fit_ncaa(X, r, d, selector="snpa", cfg=None, rng=None, fine=False):
    """Selection, radius tuning and optional fine tuning in one call."""
    if r > d:
        raise ConfigError(f"rank {r} exceeds the number of anchors d={d}")
    sel = select_anchors(X, d, selector, rng)
    if sel.Y.shape[1] < r:
        raise ConfigError(
            f"selection produced only {sel.Y.shape[1]} anchors for rank {r}"
        )
    model = tune_epsilon(X, sel.Y, r, cfg, rng)
    if fine:
        model = fine_tune(X, sel.Y, model, cfg)
    return model, sel


def run_method(method, X, r, d, tuner_cfg=None, minvol_cfg=None, rng=None,
               selector="snpa", fine=False):
    """Run one method end to end; returns factors, reconstruction, timing."""
    t0 = time.perf_counter()
    if method == "ncaa":
        model, _ = fit_ncaa(X, r, d, selector, tuner_cfg, rng, fine)
        W = model.archetypes()
        X_hat = model.reconstruction()
        H = model.H
    elif method == "minvol":
        W, H, _ = minvol_nmf(X, r, minvol_cfg, rng)
        X_hat = W @ H
        model = None
    elif method == "snpa":
        W, H = snpa_unmix(X, r)
        X_hat = W @ H
        model = None
    else:
        raise ConfigError(f"unknown method {method!r} (ncaa, minvol or snpa)")
    wall = time.perf_counter() - t0
    return {"W": W, "H": H, "X_hat": X_hat, "model": model, "wall": wall}


def _bench_task(task):
    (purity, rank, noise), trial, methods, params = task

    def base_row(method):
        return {
            "purity": purity,
            "rank": rank,
            "noise": noise,
            "trial": trial,
            "method": method,
            "mrsa_avg": float("nan"),
            "rel_error": float("nan"),
            "error": "",
        }

    def failed(method, exc):
        row = base_row(method)
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row

    try:
        spec = SyntheticSpec(
            m=params["bands"],
            n=params["samples"],
            r=rank,
            purity=purity,
            noise=noise,
            dirichlet_alpha=params["alpha"],
            seed=params["seed"],
        )
        inst = generate(spec, trial)
    except NcaaError as exc:  # a bad cell must not kill the sweep
        return [failed(m, exc) for m in methods]
    d = params["dims_factor"] * rank
    tuner = TunerConfig(**params.get("tuner_kwargs", {}))
    minvol = MinVolConfig(lam=params["lam"])
    rows = []
    for method in methods:
        try:
            res = run_method(method, inst.X, rank, d, tuner, minvol)
            rep = evaluate(res["W"], inst.W_true, inst.X, res["X_hat"],
                           method_tag=method)
            row = base_row(method)
            row["mrsa_avg"] = rep.mrsa_average
            row["rel_error"] = rep.rel_error
        except NcaaError as exc:  # record, keep sweeping
            row = failed(method, exc)
        rows.append(row)
    return rows


def bench_run(cells, trials, methods, params, threads=1):
    """Full sweep: every (purity, rank, noise) cell times `trials` instances.

    Rows come back sorted by (cell, trial, method) regardless of the worker
    pool layout, so output files are reproducible for a fixed seed.
    """
    tasks = [
        (cell, trial, list(methods), params)
        for cell in cells
        for trial in range(trials)
    ]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(_bench_task, tasks))
    else:
        chunks = [_bench_task(t) for t in tasks]
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=lambda r: (r["purity"], r["rank"], r["noise"], r["trial"],
                             r["method"]))
    return rows


def aggregate_rows(rows):
    """Per-cell mean and std MRSA plus best-method counts (Table-1 style)."""
    cells = {}
    for row in rows:
        key = (row["purity"], row["rank"], row["noise"])
        cells.setdefault(key, {}).setdefault(row["method"], {})[row["trial"]] = row

    out = []
    for key in sorted(cells):
        methods = cells[key]
        best_count = {m: 0 for m in methods}
        trials = sorted({t for m in methods.values() for t in m})
        for t in trials:
            scores = {
                m: methods[m][t]["mrsa_avg"]
                for m in methods
                if t in methods[m] and methods[m][t]["error"] == ""
            }
            finite = {m: v for m, v in scores.items() if np.isfinite(v)}
            if not finite:
                continue
            best = min(finite.values())
            for m, v in finite.items():
                if v == best:
                    best_count[m] += 1
        for m in sorted(methods):
            vals = np.array(
                [
                    r["mrsa_avg"]
                    for r in methods[m].values()
                    if r["error"] == "" and np.isfinite(r["mrsa_avg"])
                ]
            )
            out.append(
                {
                    "purity": key[0],
                    "rank": key[1],
                    "noise": key[2],
                    "method": m,
                    "trials": int(vals.size),
                    "mrsa_mean": float(vals.mean()) if vals.size else float("nan"),
                    "mrsa_std": float(vals.std()) if vals.size else float("nan"),
                    "best_count": best_count[m],
                }
            )
    return out
