#!/usr/bin/env python3
"""Number puzzles: predict the 8th element of an integer series from the first 7.

Runs the four built-in series in both clue modes. Extra series can be
supplied in a file with one puzzle per line, comma-separated, last value =
expected answer.
"""

import argparse
import dataclasses

from prnn import BUILTIN_PUZZLES, PuzzleSeries, predict_last


def load_user_puzzles(path):
    puzzles = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            values = tuple(int(tok) for tok in line.split(","))
            puzzles.append(PuzzleSeries(f"user{i}", values))
    return puzzles


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--reservoir", type=int, default=4)
    ap.add_argument("--puzzles", help="file of extra series (comma-separated integers)")
    args = ap.parse_args()

    puzzles = list(BUILTIN_PUZZLES.values())
    if args.puzzles:
        puzzles += load_user_puzzles(args.puzzles)

    print(f"{'series':8s} {'clue':14s} {'plurality':>9s} {'expected':>8s} {'per-trial':>9s}")
    for puzzle in puzzles:
        for clue in ("none", "previous-value"):
            p = dataclasses.replace(puzzle, clue_mode=clue)
            rep = predict_last(p, n_res=args.reservoir, trials=args.trials, seed_base=args.seed)
            mark = "" if rep.plurality == rep.expected else "  <- off"
            print(f"{rep.puzzle:8s} {clue:14s} {str(rep.plurality):>9s} "
                  f"{rep.expected:>8d} {rep.correct_rate:>8.1%}{mark}")


if __name__ == "__main__":
    main()
