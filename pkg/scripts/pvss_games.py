"""Correctness game, cheating strategies and the ciphertext smoke test."""

import argparse

from latbeacon.core import Rng
from latbeacon.games import CHEATS, CheatBench, ciphertext_smoke_test, correctness_game, run_cheat
from latbeacon.params import get_params
from latbeacon.pvss import pvss_setup


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--params", default="toy")
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--smoke-params", default="toy64",
                    help="set for the ciphertext test; toy's dimension is too small to hide messages")
    args = ap.parse_args()
    base = get_params(args.params)
    for n, t in ((4, 1), (7, 3)):
        pp = pvss_setup(base.with_nt(n, t), Rng.from_int(n).seed)
        wins = 0
        for k in range(args.runs):
            r = Rng.from_int(k)
            corrupted = sorted({1 + r.randbelow(n) for _ in range(t)})
            wins += correctness_game(pp, n, t, corrupted, r)
        print(f"correctness n={n} t={t}: {wins}/{args.runs}")
    pp = pvss_setup(base, Rng.from_int(5).seed)
    bench = CheatBench(pp, 4, 1, Rng.from_int(50))
    print("cheat\trejected\twins")
    for name in CHEATS:
        rejected, wins = run_cheat(name, bench, args.trials, Rng.from_int(51))
        print(f"{name}\t{rejected}/{args.trials}\t{wins}")
    pp = pvss_setup(get_params(args.smoke_params), Rng.from_int(5).seed)
    pval = ciphertext_smoke_test(pp, 0, pp.params.p - 1, 2000, Rng.from_int(52))
    print(f"ciphertext smoke test on {args.smoke_params} (Welch t on c2): p={pval:.4g}")


if __name__ == "__main__":
    main()
