"""Finite-k error of P(M_{n_k} <= 1 - beta^-k) against exp(-theta*lambda) over a (beta, lambda, k) grid.

    python scripts/convergence_sweep.py --betas 2 3 --lambdas 1 1/2 --k-max 14 --out sweep.csv
"""
import argparse
from fractions import Fraction

from renyi_evt.evt import EvtParams, convergence_table
from renyi_evt.io import RunManifest, format_table, write_output


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--betas", type=int, nargs="+", default=[2, 3])
    ap.add_argument("--lambdas", type=Fraction, nargs="+", default=[Fraction(1)])
    ap.add_argument("--k-min", type=int, default=3)
    ap.add_argument("--k-max", type=int, default=12)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    rows = []
    for beta in args.betas:
        for lam in args.lambdas:
            for r in convergence_table(EvtParams(beta, lam, args.k_min, args.k_max), exact_method="none"):
                rows.append(
                    {
                        "beta": beta,
                        "lambda": lam,
                        "k": r.k,
                        "n_k": r.n_k,
                        "p_fib": r.p_fib,
                        "limit": r.limit,
                        "abs_err": r.abs_err,
                        "err_times_beta_k": r.abs_err * beta**r.k,
                        "tail_bound": r.tail_bound,
                    }
                )
    print(format_table([{k: v for k, v in r.items() if k != "p_fib"} for r in rows]))
    if args.out:
        params = {"betas": args.betas, "lambdas": [str(x) for x in args.lambdas], "k_min": args.k_min, "k_max": args.k_max}
        write_output(args.out, rows, RunManifest("convergence_sweep", params, {}))


if __name__ == "__main__":
    main()
