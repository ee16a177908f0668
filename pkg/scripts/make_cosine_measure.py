#!/usr/bin/env python3
"""Write a discretized diagonal cosine measure to a JSON file.

The file carries self-describing metadata, so `lcsim trivial --measure FILE`
can rebuild the full four-setting family on the same grid and report its CHSH
value alongside the triviality verdict.
"""

import argparse
import math

from lcsim.lcmeasure import cosine_diagonal_measure, save_measure


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--grid", type=int, default=64, help="diagonal grid points")
    parser.add_argument("--a", type=float, default=0.0)
    parser.add_argument("--b", type=float, default=math.pi / 4)
    parser.add_argument("--m1", type=int, default=8)
    parser.add_argument("--m2", type=int, default=8)
    parser.add_argument("--weight-side", type=int, choices=(1, 2), default=1)
    parser.add_argument("--out", required=True)
    args = parser.parse_args()

    measure = cosine_diagonal_measure(
        args.grid, args.a, args.b, m1=args.m1, m2=args.m2, weight_side=args.weight_side
    )
    meta = {
        "family": "cosine-diagonal",
        "grid": args.grid,
        "a": args.a,
        "b": args.b,
        "m1": args.m1,
        "m2": args.m2,
        "weight_side": args.weight_side,
    }
    save_measure(args.out, measure, meta=meta)
    print(f"wrote {args.out}: {args.grid}x{args.grid} diagonal source, settings ({args.a}, {args.b})")


if __name__ == "__main__":
    main()
