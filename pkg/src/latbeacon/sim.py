"""Lockstep simulator of the synchronous broadcast model with static corruptions.

Every round is a barrier: participants act on what was delivered before the
round opened, then all messages of the round are delivered at once. Corrupted
participants are rushing: they act after the honest ones and may read the
honest messages of the current round.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import drng
from .core import Rng
from .encoding import Reader, Writer
from .errors import BeaconError, DecodeError
from .params import SystemParams
from .pvss import DecryptionShare, KeyAnnouncement, SharingTranscript

PHASES = ("init", "join", "share", "reveal", "gossip")
# phases that are message-exchange barriers of the protocol itself
COUNTED_PHASES = ("share", "reveal")


@dataclass(frozen=True)
class NetworkConfig:
    n: int
    t: int
    delta_ms: float = 100.0
    corrupted: tuple = ()
    strategy: str = "honest"
    seed: bytes = bytes(32)
    threads: int = 1
    allow_majority: bool = False  # lets |C| exceed t, for negative tests
    gossip: bool = False  # honest nodes broadcast their output after each epoch

    def validate(self) -> None:
        if self.strategy not in STRATEGIES:
            raise BeaconError("unknown-strategy", self.strategy)
        if len(self.seed) != 32:
            raise BeaconError("invalid-config", "seed must be 32 bytes")
        if self.n < 1 or self.t < 0 or self.t >= self.n:
            raise BeaconError("invalid-config", f"n={self.n} t={self.t}")
        bad = [c for c in self.corrupted if not 1 <= c <= self.n]
        if bad or len(set(self.corrupted)) != len(self.corrupted):
            raise BeaconError("invalid-config", f"corrupted ids {self.corrupted}")
        if 2 * self.t >= self.n:
            raise BeaconError("invalid-config", f"need t < n/2, got n={self.n} t={self.t}")
        if not self.allow_majority and len(self.corrupted) > self.t:
            raise BeaconError("invalid-config", f"|C|={len(self.corrupted)} exceeds t={self.t}")
        if self.threads < 1:
            raise BeaconError("invalid-config", "threads must be positive")


@dataclass(frozen=True)
class Message:
    sender: int
    payload: bytes
    round: int


class BroadcastBus:
    """Append-only log of rounds. Messages of round r are delivered when r closes."""

    def __init__(self):
        self.rounds: list[list[Message]] = []
        self.phases: list[str] = []
        self.open = False

    @property
    def current(self) -> int:
        return len(self.rounds) - 1

    def open_round(self, phase: str) -> int:
        if self.open:
            raise BeaconError("bus-state", "previous round still open")
        self.rounds.append([])
        self.phases.append(phase)
        self.open = True
        return self.current

    def post(self, sender: int, payload: bytes) -> None:
        if not self.open:
            raise BeaconError("bus-state", "no open round")
        self.rounds[-1].append(Message(sender, bytes(payload), self.current))

    def close_round(self) -> None:
        self.open = False

    def delivered(self, r: int) -> list[Message]:
        if r > self.current or (r == self.current and self.open):
            raise BeaconError("bus-state", f"round {r} not delivered yet")
        return list(self.rounds[r])

    def rushing_view(self) -> list[Message]:
        """Messages posted so far in the open round (corrupted parties only)."""
        return list(self.rounds[-1]) if self.open else []

    def bytes_by_phase(self) -> dict[str, int]:
        out = dict.fromkeys(PHASES, 0)
        for phase, msgs in zip(self.phases, self.rounds):
            out[phase] += sum(len(m.payload) for m in msgs)
        return out


@dataclass
class Metrics:
    rounds_per_epoch: int = 0
    bytes_total: int = 0
    bytes_by_phase: dict = field(default_factory=dict)
    wallclock_model: float = 0.0  # milliseconds, rounds x delta
    epochs: int = 0
    rounds_total: int = 0
    compute_seconds: dict = field(default_factory=dict)

    def table(self) -> str:
        rows = [("rounds_per_epoch", self.rounds_per_epoch), ("rounds_total", self.rounds_total),
                ("bytes_total", self.bytes_total)]
        rows += [(f"bytes_{k}", v) for k, v in self.bytes_by_phase.items()]
        rows.append(("wallclock_model_ms", f"{self.wallclock_model:g}"))
        return "\n".join(f"{k}\t{v}" for k, v in rows)


@dataclass
class SimResult:
    records: list
    metrics: Metrics
    directory: drng.PublicDirectory
    crs: object
    config: NetworkConfig

    def __iter__(self):
        return iter((self.records, self.metrics))


# -- payload codecs -----------------------------------------------------------

def encode_announcements(anns: dict, width: int) -> bytes:
    w = Writer(width).u64(len(anns))
    for d in sorted(anns):
        anns[d].write(w.u64(d))
    return w.getvalue()


def decode_announcements(data: bytes, width: int) -> dict:
    r = Reader(data, width)
    out = {}
    for _ in range(r.length(8)):
        d = r.u64()
        out[d] = KeyAnnouncement.read(r)
    r.done()
    return out


def encode_sharing(tr: SharingTranscript, width: int) -> bytes:
    return tr.write(Writer(width)).getvalue()


def decode_sharing(data: bytes, width: int) -> SharingTranscript:
    r = Reader(data, width)
    tr = SharingTranscript.read(r)
    r.done()
    return tr


def encode_reveals(reveals: dict, width: int) -> bytes:
    w = Writer(width).u64(len(reveals))
    for i in sorted(reveals):
        reveals[i].write(w.u64(i))
    return w.getvalue()


def decode_reveals(data: bytes, width: int) -> dict:
    r = Reader(data, width)
    out = {}
    for _ in range(r.length(8)):
        i = r.u64()
        out[i] = DecryptionShare.read(r)
    r.done()
    return out


def _try(decoder, data, width):
    try:
        return decoder(data, width)
    except (DecodeError, ValueError):
        return None


# -- adversaries --------------------------------------------------------------

class Adversary:
    """Honest behaviour; strategies override the hooks they deviate in."""

    name = "honest"

    def __init__(self, crs, width: int, rng: Rng):
        self.crs = crs
        self.width = width
        self.rng = rng
        self.observed = 0

    def init(self, state, honest: dict, view: list[Message]) -> bytes | None:
        return encode_announcements(honest, self.width)

    def share(self, state, honest: SharingTranscript, view: list[Message]) -> bytes | None:
        return encode_sharing(honest, self.width)

    def reveal(self, state, honest: dict, view: list[Message]) -> bytes | None:
        return encode_reveals(honest, self.width)


class SilentAdversary(Adversary):
    name = "honest-but-silent"

    def reveal(self, state, honest, view):
        return None


class BadKeyProof(Adversary):
    """Announces random public keys carrying proofs made for its real keys."""

    name = "bad-key-proof"

    def init(self, state, honest, view):
        q, u = self.crs.params.q, self.crs.params.u
        forged = {d: KeyAnnouncement(self.rng.uniform_mod(q, u), ka.proof0) for d, ka in honest.items()}
        return encode_announcements(forged, self.width)


class BadShareProof(Adversary):
    name = "bad-share-proof"

    def share(self, state, honest, view):
        pr = honest.proof1
        z = pr.responses.copy()
        z[0, 0] += 1
        bad = SharingTranscript(honest.dealer, honest.ciphertexts, type(pr)(pr.commitments, pr.challenges, z))
        return encode_sharing(bad, self.width)


class WrongShareValue(Adversary):
    name = "wrong-share-value"

    def reveal(self, state, honest, view):
        p = self.crs.params.p
        bent = {i: DecryptionShare(ds.holder, (ds.share + 1) % p, ds.proof2) for i, ds in honest.items()}
        return encode_reveals(bent, self.width)


class SpliceTranscripts(Adversary):
    """Keeps its own first ciphertext and proof, takes the rest from an honest dealer's sharing."""

    name = "splice-transcripts"

    def share(self, state, honest, view):
        for msg in view:
            other = _try(decode_sharing, msg.payload, self.width)
            if other is not None and len(other.ciphertexts) == len(honest.ciphertexts):
                cts = (honest.ciphertexts[0],) + tuple(other.ciphertexts[1:])
                return encode_sharing(SharingTranscript(honest.dealer, cts, honest.proof1), self.width)
        return encode_sharing(honest, self.width)


class LastRevealWithhold(Adversary):
    """Waits for every honest reveal of the round, then withholds its own."""

    name = "last-reveal-withhold"

    def reveal(self, state, honest, view):
        self.observed += len(view)
        return None


class OverflowClaims(Adversary):
    """Out-of-range residues: ciphertext c2 >= q on even epochs, shares >= p on odd ones."""

    name = "overflow-claims"

    def _cap(self, x: int) -> int:
        return min(x, (1 << (8 * self.width)) - 1)

    def share(self, state, honest, view):
        if state.epoch % 2:
            return encode_sharing(honest, self.width)
        ct0 = honest.ciphertexts[0]
        bumped = type(ct0)(ct0.c1, self._cap(ct0.c2 + self.crs.params.q))
        cts = (bumped,) + tuple(honest.ciphertexts[1:])
        return encode_sharing(SharingTranscript(honest.dealer, cts, honest.proof1), self.width)

    def reveal(self, state, honest, view):
        if state.epoch % 2 == 0:
            return encode_reveals(honest, self.width)
        p = self.crs.params.p
        big = {i: DecryptionShare(ds.holder, self._cap(ds.share + p), ds.proof2) for i, ds in honest.items()}
        return encode_reveals(big, self.width)


STRATEGIES = {
    "honest": Adversary,
    "honest-but-silent": SilentAdversary,
    "withhold-reveals": SilentAdversary,
    "bad-key-proof": BadKeyProof,
    "bad-share-proof": BadShareProof,
    "wrong-share-value": WrongShareValue,
    "splice-transcripts": SpliceTranscripts,
    "last-reveal-withhold": LastRevealWithhold,
    "overflow-claims": OverflowClaims,
}

# the standard adversary library (aliases and the no-op excluded)
ADVERSARY_LIBRARY = ("honest-but-silent", "bad-key-proof", "bad-share-proof", "wrong-share-value",
                     "splice-transcripts", "last-reveal-withhold", "overflow-claims")


def make_adversary(strategy: str, crs, width: int, rng: Rng) -> Adversary:
    try:
        return STRATEGIES[strategy](crs, width, rng)
    except KeyError:
        raise BeaconError("unknown-strategy", strategy) from None


def adversary_act(adversary: Adversary, phase: str, state, honest, view) -> bytes | None:
    return getattr(adversary, phase)(state, honest, view)


# -- the run ------------------------------------------------------------------

class _Runner:
    def __init__(self, config: NetworkConfig, params: SystemParams, check_agreement: bool):
        config.validate()
        self.config = config
        self.params = params.with_nt(config.n, config.t)
        master = Rng(config.seed)
        self.crs = drng.drng_setup(self.params, master.child("setup").seed)
        self.width = self.params.width
        self.bus = BroadcastBus()
        self.master = master
        self.corrupted = set(config.corrupted)
        self.adv = {c: make_adversary(config.strategy, self.crs, self.width, master.child("adversary", c))
                    for c in sorted(self.corrupted)}
        self.pool = ThreadPoolExecutor(config.threads) if config.threads > 1 else None
        self.check_agreement = check_agreement
        self.timing = dict.fromkeys(PHASES, 0.0)
        self.states: dict = {}
        self.directory = None

    def _map(self, fn, items):
        return list(self.pool.map(fn, items)) if self.pool else [fn(x) for x in items]

    def _round(self, phase: str, honest_fn, adv_fn, actors) -> list[Message]:
        """One barrier: honest actors post in id order, then corrupted ones (rushing)."""
        t0 = time.perf_counter()
        r = self.bus.open_round(phase)
        honest_ids = [a for a in actors if a not in self.corrupted]
        for pid, payload in zip(honest_ids, self._map(honest_fn, honest_ids)):
            if payload is not None:
                self.bus.post(pid, payload)
        for pid in [a for a in actors if a in self.corrupted]:
            payload = adv_fn(pid, self.bus.rushing_view())
            if payload is not None:
                self.bus.post(pid, payload)
        self.bus.close_round()
        self.timing[phase] += time.perf_counter() - t0
        return self.bus.delivered(r)

    def init(self) -> None:
        parts = list(range(1, self.config.n + 1))
        states = {pid: drng.ParticipantState(pid, rng=self.master.child("party", pid)) for pid in parts}

        def honest_anns(pid):
            return drng.init_announce(self.crs, states[pid], parts, states[pid].rng.child("init"))

        def honest(pid):
            return encode_announcements(honest_anns(pid), self.width)

        def corrupt(pid, view):
            return self.adv[pid].init(states[pid], honest_anns(pid), view)

        msgs = self._round("init", honest, corrupt, parts)
        announced = {}
        for m in msgs:
            anns = _try(decode_announcements, m.payload, self.width)
            if anns is not None:
                announced[m.sender] = anns
        directory, _ = drng.qualify(self.crs, announced, parts)
        drng.finish_init(directory, states)
        self.directory, self.states = directory, states

    def join(self, joiner: int) -> bool:
        d = self.directory
        pending = {}

        def honest(pid):
            st = self.states[pid]
            if st.id_qual is None or not st.is_holder:
                return None
            anns = drng.join_announce_one(self.crs, st, joiner, len(d.qual) + 1)
            pending[pid] = anns
            return encode_announcements({joiner: anns}, self.width)

        def corrupt(pid, view):
            return honest(pid)

        msgs = self._round("join", honest, corrupt, sorted(self.states))
        anns = {}
        for m in msgs:
            got = _try(decode_announcements, m.payload, self.width)
            st = self.states.get(m.sender)
            if got and joiner in got and st is not None and st.id_qual is not None:
                anns[st.id_qual] = got[joiner]
        new_dir = drng.drng_join(self.crs, d, joiner, anns)
        drng.admit_joiner(new_dir, self.states, joiner, self.master)
        self.directory = new_dir
        return new_dir is not d

    def epoch(self, e: int) -> drng.EpochRecord:
        d, states = self.directory, self.states
        active = sorted(pid for pid, st in states.items() if st.id_qual is not None)
        for pid in active:
            states[pid].start_epoch(e)
        qid = {pid: states[pid].id_qual for pid in active}

        def honest_tr(pid):
            return drng.drng_randgen_round1(states[pid], self.crs, d)

        def share_honest(pid):
            return encode_sharing(honest_tr(pid), self.width)

        def share_corrupt(pid, view):
            return self.adv[pid].share(states[pid], honest_tr(pid), view)

        msgs = self._round("share", share_honest, share_corrupt, active)
        sharings = {}
        for m in msgs:
            tr = _try(decode_sharing, m.payload, self.width)
            if tr is not None and m.sender in qid and tr.dealer == qid[m.sender]:
                sharings[qid[m.sender]] = tr

        def reveal_honest(pid):
            out = drng.drng_randgen_round2(states[pid], self.crs, d, sharings)
            return encode_reveals(out, self.width) if out else None

        def reveal_corrupt(pid, view):
            out = drng.drng_randgen_round2(states[pid], self.crs, d, sharings)
            return self.adv[pid].reveal(states[pid], out, view) if out else None

        msgs = self._round("reveal", reveal_honest, reveal_corrupt, active)
        reveals = {}
        for m in msgs:
            got = _try(decode_reveals, m.payload, self.width)
            if got is None or m.sender not in qid:
                continue
            j = qid[m.sender]
            for i, ds in got.items():
                reveals[(i, j)] = ds
        record = drng.drng_finalize(self.crs, d, e, sharings, reveals)
        if self.check_agreement:
            ref = record.to_bytes(self.width)
            for pid in active:
                if pid not in self.corrupted:
                    mine = drng.drng_finalize(self.crs, d, e, sharings, reveals)
                    if mine.to_bytes(self.width) != ref:
                        raise BeaconError("disagreement", f"participant {pid} epoch {e}")
        for pid in active:
            states[pid].phase = drng.Phase.DONE
        if self.config.gossip:
            self._gossip(record, active)
        return record

    def _gossip(self, record, active) -> None:
        """Result broadcast after the epoch; informational, not a protocol round."""
        omega = Writer(1).u64(record.epoch).flag(record.omega is not None).u64(record.omega or 0).getvalue()
        msgs = self._round("gossip", lambda pid: omega, lambda pid, view: None, active)
        if any(m.payload != omega for m in msgs):
            raise BeaconError("disagreement", f"gossiped outputs differ in epoch {record.epoch}")

    def close(self):
        if self.pool:
            self.pool.shutdown()


def sim_run(config: NetworkConfig, params: SystemParams, epochs: int, *, joins: dict | None = None,
            check_agreement: bool = False) -> SimResult:
    """Init once, then ``epochs`` epochs; ``joins`` maps an epoch to a joiner admitted before it."""
    runner = _Runner(config, params, check_agreement)
    try:
        runner.init()
        init_rounds = runner.bus.current + 1
        records = []
        epoch_rounds = 0
        for e in range(epochs):
            if joins and e in joins:
                runner.join(joins[e])
            before = runner.bus.current
            records.append(runner.epoch(e))
            epoch_rounds += sum(ph in COUNTED_PHASES for ph in runner.bus.phases[before + 1:])
    finally:
        runner.close()
    by_phase = runner.bus.bytes_by_phase()
    rounds_total = runner.bus.current + 1
    metrics = Metrics(
        rounds_per_epoch=epoch_rounds // epochs if epochs else 0,
        bytes_total=sum(by_phase.values()),
        bytes_by_phase=by_phase,
        wallclock_model=rounds_total * config.delta_ms,
        epochs=epochs,
        rounds_total=rounds_total,
        compute_seconds=dict(runner.timing),
    )
    assert init_rounds == 1
    return SimResult(records, metrics, runner.directory, runner.crs, config)


def default_t(n: int) -> int:
    return (n - 1) // 2


def measure_scaling(params: SystemParams, n_list, t_rule=default_t, seed: bytes = bytes(32),
                    epochs: int = 1) -> list[dict]:
    """One row per n: bytes per phase, rounds and compute time per node."""
    n_list = list(n_list)
    if n_list != sorted(n_list):
        raise BeaconError("invalid-config", "n_list must be ascending")
    rows = []
    for n in n_list:
        cfg = NetworkConfig(n=n, t=t_rule(n), seed=seed)
        t0 = time.perf_counter()
        res = sim_run(cfg, params, epochs)
        elapsed = time.perf_counter() - t0
        m = res.metrics
        rows.append({"n": n, "t": cfg.t, "bytes_total": m.bytes_total, **{f"bytes_{k}": v for k, v in
                     m.bytes_by_phase.items()}, "rounds_per_epoch": m.rounds_per_epoch,
                     "seconds_per_node": elapsed / n})
    by_n = {r["n"]: r["bytes_total"] for r in rows}
    for r in rows:
        half = r["n"] // 2
        r["ratio_vs_half"] = by_n[r["n"]] / by_n[half] if r["n"] % 2 == 0 and half in by_n else float("nan")
    return rows


def format_table(rows: list[dict], sep: str = "\t") -> str:
    if not rows:
        return ""
    cols = list(rows[0])
    lines = [sep.join(cols)]
    for r in rows:
        lines.append(sep.join(f"{r[c]:.4g}" if isinstance(r[c], float) else str(r[c]) for c in cols))
    return "\n".join(lines)


def omega_values(records) -> np.ndarray:
    return np.array([r.omega for r in records if r.omega is not None], dtype=np.int64)
