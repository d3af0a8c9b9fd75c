#!/usr/bin/env python3
"""Trajectory replay: learn a multi-dimensional trajectory, then shrink the network.

By default uses synthetic 4-dimensional sinusoid mixtures of 600 points; a
recorded trajectory can be supplied as CSV instead (optionally subsampled),
in which case a single learn-and-reduce pass is reported.
"""

import argparse

import numpy as np

from prnn import (
    BenchConfig,
    init_reservoir,
    learn_output_weights,
    load_trajectory_csv,
    nrmse,
    real_jordan,
    reduce_model,
    reduced_trajectory,
    run_trials,
    subsample,
    trajectory,
)


def run_csv(args):
    series = load_trajectory_csv(args.input, tau=args.tau)
    if args.stride > 1:
        series = subsample(series, args.stride)
    print(f"loaded {series.d} dimensions x {series.n_points} time points")
    for attempt in range(args.attempts):
        init = init_reservoir(series.d, args.reservoir, args.seed + attempt)
        model = learn_output_weights(series, init)
        with np.errstate(all="ignore"):
            try:
                err = nrmse(series, trajectory(model, series.n_points))
            except ValueError:
                err = float("inf")
        if err < 1.0:
            break
        print(f"attempt {attempt}: replay NRMSE {err:.3g} >= 1, redrawing reservoir")
    else:
        print("no stable fit found; try a larger reservoir or more attempts")
        return
    print(f"replay NRMSE before reduction: {err:.4f}")
    form = real_jordan(model.w, model.x0, d_out=series.d)
    reduced = reduce_model(form, series, args.theta)
    err_red = nrmse(series, reduced_trajectory(reduced, series.n_points))
    print(f"network size: {model.n} -> {reduced.width} "
          f"({1 - reduced.width / model.n:.0%} removed)")
    print(f"replay NRMSE after reduction: {err_red:.4f}")


def run_synthetic(args):
    report = run_trials(BenchConfig(
        preset="trajectory", trials=args.trials, seed_base=args.seed,
        n_res=args.reservoir, theta=args.theta,
    ))
    for r in report.records:
        status = "ok" if r.ok else f"failed ({r.note})"
        print(f"seed {r.seed:4d}: replay {r.nrmse_train:.3f}  "
              f"size {r.size_before + 4} -> {r.size_after}  "
              f"reduced replay {r.nrmse_final:.3f}  [{status}]")
    print(f"\nsuccess rate (replay < 1, >= 10% removed, reduced <= 1): {report.success_rate:.0%}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--input", help="trajectory CSV; synthetic mixtures when omitted")
    ap.add_argument("--tau", type=float, default=1.0)
    ap.add_argument("--stride", type=int, default=1, help="keep every stride-th time point")
    ap.add_argument("--trials", type=int, default=5, help="synthetic trials")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--reservoir", type=int, default=200)
    ap.add_argument("--theta", type=float, default=0.999)
    ap.add_argument("--attempts", type=int, default=5, help="reservoir redraws for CSV input")
    args = ap.parse_args()
    if args.input:
        run_csv(args)
    else:
        run_synthetic(args)


if __name__ == "__main__":
    main()
