"""Simulate many epochs and run the uniformity tests on the outputs."""

import argparse

from latbeacon.cli import parse_seed
from latbeacon.params import get_params
from latbeacon.sim import NetworkConfig, omega_values, sim_run
from latbeacon.stats import run_all
from latbeacon.transcript import TranscriptFile


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--params", default="p31")
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--t", type=int, default=1)
    ap.add_argument("--epochs", type=int, default=10_000)
    ap.add_argument("--seed", type=parse_seed, default=parse_seed("9"))
    ap.add_argument("--out", help="write the transcript file here")
    args = ap.parse_args()
    params = get_params(args.params)
    res = sim_run(NetworkConfig(n=args.n, t=args.t, seed=args.seed), params, args.epochs)
    values = omega_values(res.records)
    print(f"outputs={values.size} bottom={args.epochs - values.size} p={params.p}")
    for r in run_all(values, params.p):
        print(r.line())
    if args.out:
        TranscriptFile(res.crs.params, res.crs.seed, res.directory, res.records).write_to(args.out)


if __name__ == "__main__":
    main()
