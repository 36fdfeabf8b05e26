#!/usr/bin/env python3
"""Convergence of the exact finite-N second moment toward its limit.

For each N the table shows (1/N) log E Z^2 from quadrature, the limiting
value beta^2 xi(1) + max f, and the gap, e.g.

    python scripts/second_moment_table.py --model models/sk.json --beta 0.5
"""

import argparse

from spinmix import beta_m, build_finite_model, load_model, log_E_Z2_exact, maximize_f


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", required=True)
    ap.add_argument("--beta", type=float, default=None,
                    help="default: half the second-moment threshold")
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200, 400, 800])
    args = ap.parse_args(argv)

    model = load_model(args.model)
    beta = args.beta if args.beta is not None else 0.5 * beta_m(model)
    limit = beta * beta * model.xi1() + maximize_f(model, beta).value
    print(f"beta = {beta!r}, limit = {limit!r}")
    print(f"{'N':>6}  {'(1/N) log E Z^2':>18}  {'gap':>12}")
    for N in args.sizes:
        val = log_E_Z2_exact(build_finite_model(model, N), beta)
        print(f"{N:6d}  {val:18.10f}  {val - limit:12.3e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(run())
