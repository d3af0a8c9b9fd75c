#!/usr/bin/env python3
"""Superimposed-oscillator experiment: learn, reduce, report sizes and errors.

The minimal network for the eight-oscillator sum has 16 neurons (two per
frequency); this script shows how often the reduction finds it.
"""

import argparse

from prnn import BenchConfig, run_trials


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--reservoir", type=int, default=200)
    ap.add_argument("--theta", type=float, default=0.99)
    args = ap.parse_args()

    report = run_trials(BenchConfig(
        preset="mso8", trials=args.trials, seed_base=args.seed,
        n_res=args.reservoir, theta=args.theta,
    ))
    for r in report.records:
        status = "ok" if r.ok else f"failed ({r.note})"
        print(f"seed {r.seed:4d}: train NRMSE {r.nrmse_train:.2e}  "
              f"size {r.size_before} -> {r.size_after}  "
              f"NRMSE over 300 steps {r.nrmse_final:.2e}  [{status}]")
    print(f"\nmedian reduced size: {report.median_size}")
    print(f"median NRMSE (300 steps): {report.median_nrmse:.3e}")
    print(f"minimal-size rate (16 neurons): {report.success_rate:.0%}")


if __name__ == "__main__":
    main()
