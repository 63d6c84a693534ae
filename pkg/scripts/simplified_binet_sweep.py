"""Where the dominant-term floor formula for F_n starts to agree with the exact values, per (beta, k)."""
import argparse

from renyi_evt.config import MapParams
from renyi_evt.evt import simplified_binet_check
from renyi_evt.io import format_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--betas", type=int, nargs="+", default=[2, 3, 4, 5])
    ap.add_argument("--k-min", type=int, default=2)
    ap.add_argument("--k-max", type=int, default=10)
    ap.add_argument("--n-max", type=int, default=80)
    args = ap.parse_args()

    rows = []
    for beta in args.betas:
        for k in range(args.k_min, args.k_max + 1):
            rep = simplified_binet_check(MapParams(beta, k), (1, args.n_max))
            rows.append(
                {
                    "beta": beta,
                    "k": k,
                    "first_unbroken": rep.first_unbroken,
                    "k_minus_2": k - 2,
                    "mismatches": " ".join(map(str, rep.mismatches)) or "-",
                    "min_margin": round(rep.min_margin, 6),
                }
            )
    print(format_table(rows))


if __name__ == "__main__":
    main()
