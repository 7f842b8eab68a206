#!/usr/bin/env python3
"""Grid-refinement study of the forward solver against the closed-form
state for a unit load on (-1, 1), u(x) = c_s (1 - x^2)^s."""

import argparse
import math
import sys

import numpy as np

from fraclap import Grid, assemble_fractional, norm_h, solve_poisson


def exact_state(x, s):
    c = math.sqrt(math.pi) * 4.0 ** (-s) / (math.gamma(s + 0.5) * math.gamma(s + 1.0))
    return c * (1.0 - x**2) ** s


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--s", type=float, default=0.5)
    parser.add_argument("--sizes", type=int, nargs="+",
                        default=[64, 128, 256, 512, 1024])
    args = parser.parse_args()

    print(f"s = {args.s}")
    print(f"{'n':>6} {'rel_l2_error':>14} {'rate':>8}")
    previous = None
    for n in args.sizes:
        grid = Grid(-1.0, 1.0, n)
        sol = solve_poisson(assemble_fractional(grid, args.s), np.ones(n))
        err = norm_h(sol.u - exact_state(grid.nodes(), args.s), grid) \
            / norm_h(exact_state(grid.nodes(), args.s), grid)
        rate = "" if previous is None else f"{math.log2(previous / err):8.2f}"
        print(f"{n:>6} {err:>14.6e} {rate:>8}")
        previous = err
    return 0


if __name__ == "__main__":
    sys.exit(main())
