#!/usr/bin/env python3
"""S_polar and S_RM at n = 128 for the RM orders 2, 3 and 4.

Pass one minus array per list size with --array (repeatable); the
shipped L = 32 table is used when none is given.
"""
import argparse
import sys

from dppolar.analyze import similarity_table, table_text
from dppolar.channel import AwgnChannel
from dppolar.construct import load_minus_array, shipped_minus_array, standard_construct
from dppolar.polar import rm_dimension


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=128)
    ap.add_argument("--orders", default="2,3,4")
    ap.add_argument("--array", action="append", default=[])
    ap.add_argument("--method", default="gaussian-approx", choices=("gaussian-approx", "genie-mc"))
    ap.add_argument("--design-ebn0", type=float, default=2.0)
    args = ap.parse_args()

    arrays = {}
    for path in args.array:
        arr = load_minus_array(path)
        arrays[arr.L] = arr
    arrays = arrays or {32: shipped_minus_array()}
    m = args.n.bit_length() - 1
    for r in (int(x) for x in args.orders.split(",")):
        k = rm_dimension(m, r)
        base = standard_construct(args.n, k, AwgnChannel(args.design_ebn0, k / args.n), args.method)
        print(f"n={args.n} k={k} (r={r})")
        print(table_text(similarity_table(args.n, r, arrays, base)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
