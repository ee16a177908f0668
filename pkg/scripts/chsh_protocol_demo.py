#!/usr/bin/env python3
"""Head-to-head CHSH demo: coincidence-conditioned protocol vs the fully
detected standard estimator, four runs each.

The coincidence protocol lands at 2*sqrt(2) ~ 2.8284; the standard estimator
sees the sawtooth correlation and stays at 2.
"""

import argparse
import math

from lcsim.models import TSIRELSON_SETTINGS
from lcsim.protocol import chsh_estimate


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=int, default=1_000_000)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument(
        "--settings",
        type=float,
        nargs=4,
        metavar=("A", "A2", "B", "B2"),
        default=list(TSIRELSON_SETTINGS),
        help="CHSH settings in radians (default: the Tsirelson quadruple)",
    )
    args = parser.parse_args()
    settings = tuple(args.settings)

    for mode in ("coincidence", "standard"):
        result = chsh_estimate(args.pairs, settings, mode=mode, base_seed=args.seed)
        print(f"mode={mode}")
        for summary in result["runs"]:
            est = summary.estimate
            print(
                f"  a={summary.a:.6f} b={summary.b:.6f}  "
                f"C={est.value:+.5f} (stderr {est.stderr:.5f}, n={est.n}), "
                f"coincidence rate {summary.coincidence_rate:.5f}"
            )
        print(f"  CHSH = {result['chsh']:.5f}")
    print(f"targets: 2*sqrt(2) = {2 * math.sqrt(2):.5f} (coincidence), 2 (standard)")


if __name__ == "__main__":
    main()
