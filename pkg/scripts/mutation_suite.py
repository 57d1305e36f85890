"""Tamper with a simulated transcript field by field and count verifier rejections."""

import argparse
import io
import tempfile
import time
from pathlib import Path

from latbeacon import cli
from latbeacon.core import Rng
from latbeacon.params import get_params
from latbeacon.sim import NetworkConfig, sim_run
from latbeacon.tamper import EXTRA_MUTATIONS, MUTATIONS, mutate
from latbeacon.transcript import TranscriptFile


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--epochs", type=int, default=3)
    ap.add_argument("--extra", action="store_true", help="include the directory mutation")
    args = ap.parse_args()
    res = sim_run(NetworkConfig(n=4, t=1, corrupted=(4,), strategy="bad-share-proof", seed=Rng.from_int(8).seed),
                  get_params("toy"), args.epochs)
    base = TranscriptFile(res.crs.params, res.crs.seed, res.directory, res.records).encode()
    names = list(MUTATIONS) + (list(EXTRA_MUTATIONS) if args.extra else [])
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "m.lbcn"
        print("class\trejected\ttrials\tseconds")
        for name in names:
            t0 = time.perf_counter()
            rejected = 0
            for k in range(args.trials):
                path.write_bytes(mutate(base, name, Rng.from_int(k).child(name)))
                rejected += cli.main(["verify", str(path)], out=io.StringIO()) == 1
            print(f"{name}\t{rejected}\t{args.trials}\t{time.perf_counter() - t0:.1f}")


if __name__ == "__main__":
    main()
