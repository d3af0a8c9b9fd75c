#!/usr/bin/env python3
"""Parabola vs sinusoid: two look-alike arcs on [0, 1] reduce to different sizes.

4t(1-t) needs three neurons (a defective unit eigenvalue), sin(pi t) needs
two (one conjugate pair), so the reduced network size separates the two.
"""

import argparse

from prnn import BenchConfig, run_trials


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--reservoir", type=int, default=30)
    ap.add_argument("--theta", type=float, default=0.99)
    args = ap.parse_args()

    for preset, minimal in (("parabola", 3), ("sinusoid", 2)):
        report = run_trials(BenchConfig(
            preset=preset, trials=args.trials, seed_base=args.seed,
            n_res=args.reservoir, theta=args.theta,
        ))
        sizes = [r.size_after for r in report.completed]
        train_errs = sorted(r.nrmse_train for r in report.completed)
        print(f"{preset}: minimal size {minimal} reached in {report.success_rate:.0%} "
              f"of {args.trials} trials (median size {report.median_size}, "
              f"median training NRMSE {train_errs[len(train_errs) // 2]:.1e}, "
              f"median reduced-replay NRMSE {report.median_nrmse:.1e})")
        print(f"  sizes: {sorted(sizes)}")


if __name__ == "__main__":
    main()
