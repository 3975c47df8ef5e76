"""Command-line harness: synth, solve, baseline, eval, bench, unmix, plotdata.

Values resolve in order: explicit flag > config-file key > built-in default.
A JSON config file holds flag names (dashes or underscores) for one
subcommand; unknown keys are rejected.  Exit codes: 0 ok, 2 configuration
error, 3 data error, 4 numeric failure.
"""

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from .baselines import MinVolConfig, minvol_nmf, snpa_unmix
from .errors import ConfigError, DataError, NcaaError, NumericFailure
from .evaluation import EvalReport, evaluate
from .fpgm import FpgmConfig
from .linalg import rng_stream
from .matio import load_matrix, save_matrix, save_matrix_binary
from .pipeline import aggregate_rows, bench_run, fit_ncaa, run_method
from .solver import TunerConfig, load_model, save_model
from .synthdata import SyntheticSpec, generate, save_instance

BOOL = argparse.BooleanOptionalAction

DEFAULTS = {
    "synth": {
        "bands": 10, "samples": 1000, "rank": 7, "purity": 1.0, "noise": 0.0,
        "alpha": 0.05, "trials": 1, "seed": 0, "out": ".", "format": "bin",
    },
    "solve": {
        "rank": 7, "dims": None, "selector": "snpa", "eps_min": 1e-3,
        "eps_max": 0.5, "delta": 1e-4, "block_size": 50, "max_outer": 20,
        "fine_tune": False, "seed": 0, "out": ".", "embed": False,
    },
    "baseline": {
        "method": "minvol", "rank": 7, "lam": 0.1, "logdet_delta": 0.1,
        "iterations": 500, "seed": 0, "out": ".",
    },
    "eval": {
        "x": None, "x_hat": None, "method_tag": "", "out": None,
        "format": "json",
    },
    "bench": {
        "purity": "0.8", "rank": "7", "noise": "0.0", "trials": 25,
        "methods": "ncaa,minvol,snpa", "samples": 1000, "bands": 10,
        "alpha": 0.05, "dims_factor": 10, "lam": 0.1, "seed": 0,
        "threads": 1, "out": ".",
    },
    "unmix": {
        "rank": 4, "dims": 20, "selector": "hc", "fine_tune": True,
        "ground_truth": None, "eps_min": 1e-3, "eps_max": 0.5, "delta": 1e-4,
        "block_size": 50, "max_outer": 20, "seed": 0, "out": ".",
        "embed": False,
    },
    "plotdata": {
        "height": None, "width": None, "out": ".",
    },
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ncaa",
        description="Near-convex archetypal analysis: solve, compare, score.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON file with flag values")
        return p

    p = add("synth", "generate synthetic benchmark instances")
    p.add_argument("--bands", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--rank", type=int)
    p.add_argument("--purity", type=float)
    p.add_argument("--noise", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "bin"])

    p = add("solve", "fit the near-convex model to a matrix file")
    p.add_argument("--input", required=True)
    p.add_argument("--rank", type=int)
    p.add_argument("--dims", type=int, help="anchor count d (default 10*rank)")
    p.add_argument("--selector", choices=["snpa", "hc"])
    p.add_argument("--eps-min", type=float)
    p.add_argument("--eps-max", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--block-size", type=int)
    p.add_argument("--max-outer", type=int)
    p.add_argument("--fine-tune", action=BOOL)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--embed", action=BOOL)

    p = add("baseline", "run a comparison method on a matrix file")
    p.add_argument("--input", required=True)
    p.add_argument("--method", choices=["minvol", "snpa"])
    p.add_argument("--rank", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--logdet-delta", type=float)
    p.add_argument("--iterations", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")

    p = add("eval", "score estimated archetypes against ground truth")
    p.add_argument("--w-est", required=True)
    p.add_argument("--w-true", required=True)
    p.add_argument("--x")
    p.add_argument("--x-hat")
    p.add_argument("--method-tag")
    p.add_argument("--out")
    p.add_argument("--format", choices=["json", "csv"])

    p = add("bench", "synthetic sweep with per-trial and aggregate tables")
    p.add_argument("--purity", help="comma list, e.g. 0.8,0.9,1")
    p.add_argument("--rank", help="comma list, e.g. 3,7")
    p.add_argument("--noise", help="comma list, e.g. 0,0.05")
    p.add_argument("--trials", type=int)
    p.add_argument("--methods", help="comma list from ncaa,minvol,snpa")
    p.add_argument("--samples", type=int)
    p.add_argument("--bands", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--dims-factor", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--out")

    p = add("unmix", "hyperspectral workflow: select, tune, fine-tune, score")
    p.add_argument("--input", required=True)
    p.add_argument("--rank", type=int)
    p.add_argument("--dims", type=int)
    p.add_argument("--selector", choices=["snpa", "hc"])
    p.add_argument("--fine-tune", action=BOOL)
    p.add_argument("--ground-truth")
    p.add_argument("--eps-min", type=float)
    p.add_argument("--eps-max", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--block-size", type=int)
    p.add_argument("--max-outer", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--embed", action=BOOL)

    p = add("plotdata", "emit signature and abundance files from a model")
    p.add_argument("--model", required=True)
    p.add_argument("--height", type=int)
    p.add_argument("--width", type=int)
    p.add_argument("--out")
    return parser


def resolve_options(args):
    """Merge CLI > config file > defaults; reject unknown config keys."""
    defaults = DEFAULTS[args.command]
    conf = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise DataError(f"config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DataError(f"config file: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, value in raw.items():
            norm = key.replace("-", "_")
            if norm == "lambda":
                norm = "lam"
            if norm not in defaults and norm not in vars(args):
                raise ConfigError(f"config file: unknown key {key!r}")
            conf[norm] = value
    opts = {}
    for key, default in defaults.items():
        cli_val = getattr(args, key, None)
        if cli_val is not None:
            opts[key] = cli_val
        elif key in conf:
            opts[key] = conf[key]
        else:
            opts[key] = default
    # required positional-like flags that have no default
    for key, value in vars(args).items():
        if key in ("command", "config"):
            continue
        if key not in opts:
            opts[key] = value if value is not None else conf.get(key)
    return opts


def _tuner_config(opts):
    return TunerConfig(
        eps_min=float(opts["eps_min"]),
        eps_max=float(opts["eps_max"]),
        delta=float(opts["delta"]),
        block_size=int(opts["block_size"]),
        max_outer=int(opts["max_outer"]),
    )


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def cmd_synth(opts):
    spec = SyntheticSpec(
        m=int(opts["bands"]),
        n=int(opts["samples"]),
        r=int(opts["rank"]),
        purity=float(opts["purity"]),
        noise=float(opts["noise"]),
        dirichlet_alpha=float(opts["alpha"]),
        trials=int(opts["trials"]),
        seed=int(opts["seed"]),
    )
    os.makedirs(opts["out"], exist_ok=True)
    for trial in range(spec.trials):
        inst = generate(spec, trial)
        if opts["format"] == "bin":
            save_instance(opts["out"], spec, trial, inst, prefix=f"trial{trial:03d}")
        else:
            for name, mat in (("X", inst.X), ("W_true", inst.W_true),
                              ("H_true", inst.H_true)):
                save_matrix(
                    os.path.join(opts["out"], f"trial{trial:03d}_{name}.csv"), mat
                )
    print(f"wrote {spec.trials} instance(s) to {opts['out']}", file=sys.stderr)
    return 0


def _solve_common(opts, selector_default_dims):
    X = load_matrix(opts["input"])
    r = int(opts["rank"])
    d = int(opts["dims"]) if opts["dims"] else selector_default_dims(r)
    if r > d:
        raise ConfigError(f"rank {r} exceeds d={d}")
    cfg = _tuner_config(opts)
    rng = rng_stream(int(opts["seed"]), 0)
    model, sel = fit_ncaa(
        X, r, d, opts["selector"], cfg, rng, fine=bool(opts["fine_tune"])
    )
    return X, model, sel


def _write_model_outputs(opts, X, model, sel):
    out = opts["out"]
    os.makedirs(out, exist_ok=True)
    save_model(model, os.path.join(out, "model.json"), embed=bool(opts["embed"]))
    save_matrix_binary(os.path.join(out, "W.bin"), model.archetypes())
    with open(os.path.join(out, "traces.csv"), "w") as fh:
        fh.write("kind,index,value\n")
        for i, e in model.error_trace:
            fh.write(f"error,{i},{e!r}\n")
        for i, e in model.epsilon_trace:
            fh.write(f"epsilon,{i},{e!r}\n")
    report = {
        "rank": int(model.rank),
        "dims": int(model.Y.shape[1]),
        "selector": sel.method,
        "selected_indices": [int(i) for i in sel.indices],
        "epsilons": [float(e) for e in model.epsilons],
        "final_error_sq": float(model.error_trace[-1][1]) if model.error_trace else None,
    }
    _write_json(os.path.join(out, "run_report.json"), report)
    return report


def cmd_solve(opts):
    X, model, sel = _solve_common(opts, lambda r: 10 * r)
    _write_model_outputs(opts, X, model, sel)
    return 0


def cmd_unmix(opts):
    X, model, sel = _solve_common(opts, lambda r: 20)
    report = _write_model_outputs(opts, X, model, sel)
    if opts["ground_truth"]:
        W_true = load_matrix(opts["ground_truth"])
        rep = evaluate(
            model.archetypes(), W_true, X, model.reconstruction(),
            method_tag="ncaa",
        )
        _write_json(os.path.join(opts["out"], "eval_report.json"),
                    rep.to_json_dict())
        print(f"average MRSA vs ground truth: {rep.mrsa_average:.4f}",
              file=sys.stderr)
    return 0


def cmd_baseline(opts):
    X = load_matrix(opts["input"])
    r = int(opts["rank"])
    out = opts["out"]
    os.makedirs(out, exist_ok=True)
    t0 = time.perf_counter()
    if opts["method"] == "minvol":
        cfg = MinVolConfig(
            lam=float(opts["lam"]),
            logdet_delta=float(opts["logdet_delta"]),
            max_iterations=int(opts["iterations"]),
        )
        W, H, trace = minvol_nmf(X, r, cfg)
        with open(os.path.join(out, "trace.csv"), "w") as fh:
            fh.write("iteration,objective\n")
            for i, v in enumerate(trace):
                fh.write(f"{i},{v!r}\n")
    else:
        W, H = snpa_unmix(X, r)
    wall = time.perf_counter() - t0
    save_matrix_binary(os.path.join(out, "W.bin"), W)
    save_matrix_binary(os.path.join(out, "H.bin"), H)
    rel = math.sqrt(float(np.sum((X - W @ H) ** 2)) / float(np.sum(X * X)))
    _write_json(
        os.path.join(out, "report.json"),
        {"method": opts["method"], "rank": r, "rel_error": rel,
         "wall_time_s": wall},
    )
    return 0


def cmd_eval(opts):
    W_est = load_matrix(opts["w_est"])
    W_true = load_matrix(opts["w_true"])
    X = load_matrix(opts["x"]) if opts["x"] else None
    X_hat = load_matrix(opts["x_hat"]) if opts["x_hat"] else None
    rep = evaluate(W_est, W_true, X, X_hat, method_tag=opts["method_tag"] or "")
    if opts["format"] == "csv":
        text = EvalReport.csv_header() + "\n" + rep.to_csv_row() + "\n"
    else:
        text = rep.to_json() + "\n"
    if opts["out"]:
        with open(opts["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _parse_list(text, cast):
    try:
        return [cast(tok) for tok in str(text).split(",") if tok != ""]
    except ValueError as exc:
        raise ConfigError(f"bad list value {text!r}") from exc


BENCH_TRIAL_COLUMNS = ["purity", "rank", "noise", "trial", "method",
                       "mrsa_avg", "rel_error", "error"]
BENCH_AGG_COLUMNS = ["purity", "rank", "noise", "method", "trials",
                     "mrsa_mean", "mrsa_std", "best_count"]


def _format_cell(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def cmd_bench(opts):
    purities = _parse_list(opts["purity"], float)
    ranks = _parse_list(opts["rank"], int)
    noises = _parse_list(opts["noise"], float)
    methods = [m.strip() for m in str(opts["methods"]).split(",") if m.strip()]
    for m in methods:
        if m not in ("ncaa", "minvol", "snpa"):
            raise ConfigError(f"unknown bench method {m!r}")
    cells = [(p, r, v) for p in purities for r in ranks for v in noises]
    params = {
        "bands": int(opts["bands"]),
        "samples": int(opts["samples"]),
        "alpha": float(opts["alpha"]),
        "dims_factor": int(opts["dims_factor"]),
        "lam": float(opts["lam"]),
        "seed": int(opts["seed"]),
    }
    rows = bench_run(cells, int(opts["trials"]), methods, params,
                     threads=int(opts["threads"]))
    out = opts["out"]
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "trials.csv"), "w") as fh:
        fh.write(",".join(BENCH_TRIAL_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_format_cell(row[c]) for c in BENCH_TRIAL_COLUMNS) + "\n")
    agg = aggregate_rows(rows)
    with open(os.path.join(out, "aggregate.csv"), "w") as fh:
        fh.write(",".join(BENCH_AGG_COLUMNS) + "\n")
        for row in agg:
            fh.write(",".join(_format_cell(row[c]) for c in BENCH_AGG_COLUMNS) + "\n")
    for row in agg:
        print(
            f"(p={row['purity']}, r={row['rank']}, noise={row['noise']}) "
            f"{row['method']}: {row['mrsa_mean']:.4g} +- {row['mrsa_std']:.4g} "
            f"({row['best_count']})",
            file=sys.stderr,
        )
    return 0


def _write_pgm(path, grid):
    lo = float(grid.min())
    hi = float(grid.max())
    if hi > lo:
        scaled = np.round((grid - lo) / (hi - lo) * 255.0)
    else:
        scaled = np.full(grid.shape, 128.0)
    data = scaled.astype(np.uint8)
    h, w = grid.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes(order="C"))


def cmd_plotdata(opts):
    model = load_model(opts["model"])
    if not opts["height"] or not opts["width"]:
        raise ConfigError("plotdata requires --height and --width")
    height = int(opts["height"])
    width = int(opts["width"])
    n = model.H.shape[1]
    if height * width != n:
        raise DataError(
            f"height*width = {height * width} does not match n = {n} pixels"
        )
    out = opts["out"]
    os.makedirs(out, exist_ok=True)
    W = model.archetypes()
    m, r = W.shape
    with open(os.path.join(out, "signatures.csv"), "w") as fh:
        for i in range(m):
            fh.write(",".join([str(i)] + [repr(float(v)) for v in W[i, :]]) + "\n")
    for k in range(r):
        grid = np.asarray(model.H[k, :]).reshape(height, width)  # row-major
        base = os.path.join(out, f"abundance_{k}")
        np.savetxt(base + ".csv", grid, fmt="%.17g", delimiter=",")
        _write_pgm(base + ".pgm", grid)
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "solve": cmd_solve,
    "baseline": cmd_baseline,
    "eval": cmd_eval,
    "bench": cmd_bench,
    "unmix": cmd_unmix,
    "plotdata": cmd_plotdata,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = resolve_options(args)
        return COMMANDS[args.command](opts)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
