#!/usr/bin/env python3
"""Recompute a minus array by Monte Carlo dynamic programming.

Checkpoints after every (n, k) entry, so an interrupted run resumes where
it stopped. With --compare the result is diffed against the shipped
L = 32 table.
"""
import argparse
import sys

from dppolar.construct import (TrainingConfig, calculate_minus_array, save_minus_array,
                               shipped_minus_array)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=8)
    ap.add_argument("--list-size", type=int, default=32)
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--ebn0", type=float, default=2.0)
    ap.add_argument("--stop-errors", type=int, default=None)
    ap.add_argument("--seed", type=int, default=2022)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--checkpoint", default=None)
    ap.add_argument("--out", required=True)
    ap.add_argument("--compare", action="store_true")
    args = ap.parse_args()

    cfg = TrainingConfig(list_size=args.list_size, trials=args.trials, ebn0_db=args.ebn0,
                         stop_errors=args.stop_errors, seed=args.seed, workers=args.workers)

    def progress(n, k, choice, values, errors):
        errs = " ".join(f"{v}:{e:.5f}" for v, e in zip(values, errors))
        print(f"n={n} k={k} minus={choice} [{errs}]", file=sys.stderr)

    arr = calculate_minus_array(args.max_n, cfg, checkpoint=args.checkpoint, on_entry=progress)
    save_minus_array(arr, args.out)
    if args.compare:
        ref = shipped_minus_array(args.max_n)
        diffs = [(nk, arr[nk], ref[nk]) for nk in sorted(arr.entries) if arr[nk] != ref[nk]]
        for (n, k), got, want in diffs:
            print(f"({n},{k}): computed {got}, table {want}")
        print(f"{len(diffs)} of {len(arr)} entries differ from the shipped table")
    return 0


if __name__ == "__main__":
    sys.exit(main())
