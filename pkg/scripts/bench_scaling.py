"""Communication and compute scaling of one epoch across committee sizes."""

import argparse

from latbeacon.cli import parse_ids, parse_seed
from latbeacon.params import get_params
from latbeacon.sim import format_table, measure_scaling


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--params", default="toy")
    ap.add_argument("--n-list", type=parse_ids, default=(4, 8, 16))
    ap.add_argument("--epochs", type=int, default=1)
    ap.add_argument("--seed", type=parse_seed, default=parse_seed("0"))
    ap.add_argument("--out", help="also write the table to this file")
    args = ap.parse_args()
    rows = measure_scaling(get_params(args.params), args.n_list, seed=args.seed, epochs=args.epochs)
    table = format_table(rows)
    print(table)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(table + "\n")


if __name__ == "__main__":
    main()
