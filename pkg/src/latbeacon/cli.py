"""Command line entry points.

Exit codes: 0 success, 1 verification failure (or failed parameter check),
2 usage, configuration or decode error.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import drng, sim, stats
from .core import Rng
from .errors import BeaconError
from .params import get_params, load_param_sets, validate_params
from .transcript import TranscriptFile

EXIT_OK, EXIT_REJECT, EXIT_ERROR = 0, 1, 2


def parse_seed(text: str) -> bytes:
    """Decimal integers map through a hash; 64 hex digits are used verbatim."""
    text = text.strip()
    if len(text) == 64:
        try:
            return bytes.fromhex(text)
        except ValueError:
            pass
    try:
        return Rng.from_int(int(text, 10)).seed
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed {text!r}") from None


def parse_ids(text: str) -> tuple:
    if not text:
        return ()
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad id list {text!r}") from None


def _params_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--params", default="toy", help="parameter set name")
    p.add_argument("--param-file", default=None, help="alternative parameter config file")
    p.add_argument("--allow-invalid", action="store_true", help="skip the noise budget check")


def _load(args, n=None, t=None):
    return get_params(args.params, n=n, t=t, path=args.param_file, allow_invalid=args.allow_invalid)


def cmd_simulate(args, out) -> int:
    params = _load(args, args.n, args.t)
    cfg = sim.NetworkConfig(n=args.n, t=args.t, delta_ms=args.delta_ms, corrupted=args.corrupt,
                            strategy=args.adversary, seed=args.seed, threads=args.threads,
                            gossip=args.gossip)
    res = sim.sim_run(cfg, params, args.epochs)
    for rec in res.records:
        shown = "BOTTOM (flagged)" if rec.omega is None else str(rec.omega)
        print(f"epoch {rec.epoch}: omega={shown} qual_prime={list(rec.qual_prime)}", file=out)
    print(res.metrics.table(), file=out)
    if args.out:
        TranscriptFile(res.crs.params, res.crs.seed, res.directory, res.records).write_to(args.out)
        print(f"wrote {args.out}", file=out)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    try:
        tf = TranscriptFile.read_from(args.file)
        crs = tf.crs()
    except (BeaconError, OSError) as exc:
        print(f"error: {exc}", file=out)
        return EXIT_ERROR
    if not drng.verify_directory(crs, tf.directory):
        print("directory: REJECT", file=out)
        return EXIT_REJECT
    failed = []
    for rec in tf.records:
        ok = drng.drng_ver(crs, tf.directory, rec, check_keys=False)
        print(f"epoch {rec.epoch}: {'accept' if ok else 'REJECT'}", file=out)
        if not ok:
            failed.append(rec.epoch)
    if failed:
        print(f"rejected epochs: {failed}", file=out)
        return EXIT_REJECT
    print(f"all {len(tf.records)} epochs accepted", file=out)
    return EXIT_OK


def cmd_stats(args, out) -> int:
    try:
        tf = TranscriptFile.read_from(args.file)
    except (BeaconError, OSError) as exc:
        print(f"error: {exc}", file=out)
        return EXIT_ERROR
    values = sim.omega_values(tf.records)
    tests = {"chi2": [stats.chi_square_uniform], "serial": [stats.serial_test],
             "all": [stats.chi_square_uniform, stats.serial_test]}[args.test]
    try:
        results = [fn(values, tf.params.p) for fn in tests]
    except BeaconError as exc:
        print(f"error: {exc}", file=out)
        return EXIT_ERROR
    print(f"samples={values.size} p={tf.params.p} bottom={len(tf.records) - values.size}", file=out)
    for r in results:
        print(r.line(), file=out)
    return EXIT_OK


def cmd_bench(args, out) -> int:
    params = _load(args)
    t0 = time.perf_counter()
    rows = sim.measure_scaling(params, args.n_list, seed=args.seed, epochs=args.epochs)
    print(sim.format_table(rows), file=out)
    print(f"total_seconds\t{time.perf_counter() - t0:.2f}", file=out)
    return EXIT_OK


def cmd_params_validate(args, out) -> int:
    sets = load_param_sets(args.param_file)
    names = sorted(sets) if args.params == "all" else [args.params]
    status = EXIT_OK
    for name in names:
        if name not in sets:
            raise BeaconError("invalid-params", f"unknown parameter set {name!r}")
        params = sets[name]
        try:
            params.check()
            report = validate_params(params)
            line = report.summary()
            if not report.ok:
                status = EXIT_REJECT
        except BeaconError as exc:
            line, status = f"FAIL: {exc}", EXIT_REJECT
        print(f"{name}\tp={params.p} q={params.q} u={params.u} v={params.v}\t{line}", file=out)
    return status


def cmd_keygen_ceremony(args, out) -> int:
    params = _load(args, args.n, args.t)
    master = Rng(args.seed)
    crs = drng.drng_setup(params, master.child("setup").seed)
    directory, _ = drng.drng_init(crs, range(1, args.n + 1), master)
    TranscriptFile(params, crs.seed, directory, []).write_to(args.out)
    print(f"qual={list(directory.qual)} wrote {args.out}", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="latbeacon", description="Lattice PVSS randomness beacon")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run the beacon in the simulator")
    _params_args(s)
    s.add_argument("--n", type=int, default=4)
    s.add_argument("--t", type=int, default=1)
    s.add_argument("--epochs", type=int, default=1)
    s.add_argument("--seed", type=parse_seed, default=parse_seed("0"))
    s.add_argument("--adversary", default="honest", help="|".join(sim.STRATEGIES))
    s.add_argument("--corrupt", type=parse_ids, default=())
    s.add_argument("--delta-ms", type=float, default=100.0)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--gossip", action="store_true", help="broadcast outputs after each epoch (not a round)")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="verify a transcript file")
    v.add_argument("file")
    v.set_defaults(func=cmd_verify)

    st = sub.add_parser("stats", help="uniformity tests on the outputs in a transcript")
    st.add_argument("file")
    st.add_argument("--test", choices=("chi2", "serial", "all"), default="all")
    st.set_defaults(func=cmd_stats)

    b = sub.add_parser("bench", help="communication and compute scaling table")
    _params_args(b)
    b.add_argument("--n-list", type=parse_ids, default=(4, 8, 16))
    b.add_argument("--epochs", type=int, default=1)
    b.add_argument("--seed", type=parse_seed, default=parse_seed("0"))
    b.set_defaults(func=cmd_bench)

    pv = sub.add_parser("params-validate", help="check the noise budget of parameter sets")
    pv.add_argument("--params", default="all")
    pv.add_argument("--param-file", default=None)
    pv.set_defaults(func=cmd_params_validate)

    k = sub.add_parser("keygen-ceremony", help="run Init alone and write the directory")
    _params_args(k)
    k.add_argument("--n", type=int, default=4)
    k.add_argument("--t", type=int, default=1)
    k.add_argument("--seed", type=parse_seed, default=parse_seed("0"))
    k.add_argument("--out", required=True)
    k.set_defaults(func=cmd_keygen_ceremony)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return args.func(args, out)
    except BeaconError as exc:
        print(f"error: {exc}", file=out)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=out)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
