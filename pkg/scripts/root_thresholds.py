"""Smallest k from which the Newton bracket r_min < r < r_max holds, per beta, plus the beta=2 comparison with 2(1 - 2^-k)."""
import argparse

from renyi_evt.io import format_table
from renyi_evt.spectral import bracket_threshold, classical_bound_threshold


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--betas", type=int, nargs="+", default=[2, 3, 4, 5, 7, 10])
    ap.add_argument("--k-max", type=int, default=64)
    args = ap.parse_args()

    rows = []
    for beta in args.betas:
        k0, checks = bracket_threshold(beta, args.k_max)
        failing = [c.k for c in checks if not c.ok]
        rows.append({"beta": beta, "K0": k0, "failing_k": " ".join(map(str, failing)) or "-"})
    print(format_table(rows))
    print(f"beta=2: r_min > 2(1 - 2^-k) for all k >= {classical_bound_threshold(args.k_max)} up to {args.k_max}")


if __name__ == "__main__":
    main()
