"""Epoch-based randomness beacon on top of the PVSS.

Identifiers: every participant has an original id. After key verification the
qualified participants are renumbered 1..n' in ascending original-id order.
The first ``n_holders`` qualified ids are key holders (their qualified id is
their Shamir evaluation point); participants admitted later through
:func:`drng_join` only deal. Record maps are keyed by qualified ids; proof
contexts use original ids so that renumbering never invalidates old proofs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .core import Rng
from .encoding import Reader, Writer
from .errors import BeaconError, DecodeError
from .params import SystemParams
from .pvss import (DecryptionShare, KeyAnnouncement, PvssPublicParams, SharingTranscript,
                   pvss_combine, pvss_dec, pvss_decver, pvss_keygen, pvss_keyver, pvss_setup,
                   pvss_share, pvss_sharever)


def key_context(dealer_orig: int, holder_orig: int) -> bytes:
    return b"key|d=%d|h=%d" % (dealer_orig, holder_orig)


def share_context(epoch: int, dealer_orig: int) -> bytes:
    return b"share|epoch=%d|d=%d" % (epoch, dealer_orig)


def dec_context(epoch: int, dealer_orig: int, holder_orig: int) -> bytes:
    return b"dec|epoch=%d|d=%d|h=%d" % (epoch, dealer_orig, holder_orig)


@dataclass
class PublicDirectory:
    announcements: dict  # (dealer qid, holder qid) -> KeyAnnouncement
    qual: tuple  # original ids, ascending; position + 1 is the qualified id
    n_holders: int

    @property
    def renumbering(self) -> dict[int, int]:
        return {orig: k for k, orig in enumerate(self.qual, start=1)}

    def original(self, qid: int) -> int:
        return self.qual[qid - 1]

    @property
    def dealers(self) -> range:
        return range(1, len(self.qual) + 1)

    @property
    def holders(self) -> range:
        return range(1, self.n_holders + 1)

    def pks(self, dealer: int) -> list:
        return [self.announcements[(dealer, j)].pk_b for j in self.holders]

    def write(self, w: Writer) -> Writer:
        w.ids(self.qual).u64(self.n_holders).u64(len(self.announcements))
        for (i, j) in sorted(self.announcements):
            self.announcements[(i, j)].write(w.u64(i).u64(j))
        return w

    @classmethod
    def read(cls, r: Reader) -> PublicDirectory:
        qual = tuple(r.ids())
        n_holders = r.u64()
        anns = {}
        for _ in range(r.length(16)):
            key = (r.u64(), r.u64())
            anns[key] = KeyAnnouncement.read(r)
        d = cls(anns, qual, n_holders)
        if list(qual) != sorted(set(qual)) or n_holders > len(qual):
            raise DecodeError("malformed", "directory ids not ascending")
        if list(anns) != sorted(anns) or set(anns) != {(i, j) for i in d.dealers for j in d.holders}:
            raise DecodeError("malformed", "directory announcements do not cover qual x holders")
        return d


class Phase(enum.IntEnum):
    IDLE = 0
    SHARED = 1
    REVEALED = 2
    DONE = 3


@dataclass
class ParticipantState:
    id_original: int
    id_qual: int | None = None
    my_keys: dict = field(default_factory=dict)  # dealer qid -> PkeKeyPair held by this participant
    qual: tuple = ()
    qual_prime: tuple = ()
    phase: Phase = Phase.IDLE
    epoch: int = 0
    rng: Rng | None = None
    secret: int | None = None

    @property
    def is_holder(self) -> bool:
        return bool(self.my_keys)

    def advance(self, expected: Phase, new: Phase) -> None:
        if self.phase != expected:
            raise BeaconError("wrong-phase", f"participant {self.id_original} is {self.phase.name}")
        self.phase = new

    def start_epoch(self, epoch: int) -> None:
        """Reset per-epoch state; QUAL is untouched."""
        self.epoch = epoch
        self.phase = Phase.IDLE
        self.qual_prime = ()
        self.secret = None

    def epoch_rng(self, purpose: str) -> Rng:
        return self.rng.child("epoch", self.epoch, purpose)


@dataclass
class EpochRecord:
    epoch: int
    qual_prime: tuple
    sharings: dict  # dealer qid -> SharingTranscript (every decodable one received)
    reveals: dict  # (dealer qid, holder qid) -> DecryptionShare
    share_sets: dict  # dealer qid -> tuple of holder qids, for dealers in qual_prime
    secrets: dict  # dealer qid -> reconstructed secret
    omega: int | None

    @property
    def proof(self) -> tuple:
        """The public transcript certifying omega; key proofs live in the directory."""
        return self.qual_prime, self.sharings, self.reveals

    def write(self, w: Writer) -> Writer:
        w.u64(self.epoch).ids(self.qual_prime)
        w.u64(len(self.sharings))
        for i in sorted(self.sharings):
            self.sharings[i].write(w.u64(i))
        w.u64(len(self.reveals))
        for (i, j) in sorted(self.reveals):
            self.reveals[(i, j)].write(w.u64(i).u64(j))
        w.u64(len(self.share_sets))
        for i in sorted(self.share_sets):
            w.u64(i).ids(self.share_sets[i])
        w.u64(len(self.secrets))
        for i in sorted(self.secrets):
            w.u64(i).zq(self.secrets[i])
        w.flag(self.omega is not None)
        if self.omega is not None:
            w.zq(self.omega)
        return w

    @classmethod
    def read(cls, r: Reader) -> EpochRecord:
        epoch = r.u64()
        qual_prime = tuple(r.ids())
        sharings = {}
        for _ in range(r.length(8)):
            i = r.u64()
            sharings[i] = SharingTranscript.read(r)
        reveals = {}
        for _ in range(r.length(16)):
            key = (r.u64(), r.u64())
            reveals[key] = DecryptionShare.read(r)
        share_sets = {}
        for _ in range(r.length(16)):
            i = r.u64()
            share_sets[i] = tuple(r.ids())
        secrets = {}
        for _ in range(r.length(8)):
            i = r.u64()
            secrets[i] = r.zq()
        omega = r.zq() if r.flag() else None
        for keys in (list(sharings), list(reveals), list(share_sets), list(secrets)):
            if keys != sorted(set(keys)):
                raise DecodeError("malformed", "record maps must be strictly sorted")
        return cls(epoch, qual_prime, sharings, reveals, share_sets, secrets, omega)

    def to_bytes(self, width: int) -> bytes:
        return self.write(Writer(width)).getvalue()


def drng_setup(params: SystemParams, seed: bytes) -> PvssPublicParams:
    return pvss_setup(params, seed)


def init_announce(crs: PvssPublicParams, state: ParticipantState, dealers, rng: Rng) -> dict:
    """Holder side of Init: one fresh keypair for every dealer (original ids)."""
    out = {}
    for d in dealers:
        ka, kp = pvss_keygen(crs, rng.child("key", d), key_context(d, state.id_original))
        state.my_keys[d] = kp
        out[d] = ka
    return out


def qualify(crs: PvssPublicParams, announced: dict, participants) -> tuple[PublicDirectory, list[int]]:
    """Build the directory from {holder orig: {dealer orig: KeyAnnouncement}}.

    A participant qualifies iff it announced a key for every participant and
    all of them verify.
    """
    parts = sorted(participants)
    qual = []
    for h in parts:
        anns = announced.get(h)
        if anns is None or set(anns) != set(parts):
            continue
        if all(pvss_keyver(crs, anns[d], key_context(d, h)) for d in parts):
            qual.append(h)
    if len(qual) < crs.params.t + 1:
        raise BeaconError("qual-too-small", f"{len(qual)} qualified, need {crs.params.t + 1}")
    ren = {orig: k for k, orig in enumerate(qual, start=1)}
    anns = {(ren[d], ren[h]): announced[h][d] for d in qual for h in qual}
    return PublicDirectory(anns, tuple(qual), len(qual)), qual


def drng_init(crs: PvssPublicParams, participants, rng: Rng, announce=None):
    """Run Init among ``participants`` (original ids).

    ``announce`` optionally replaces a holder's announcements, which is how
    corrupted participants inject their own. Returns the directory and the
    participant states keyed by original id.
    """
    parts = sorted(participants)
    states = {pid: ParticipantState(pid, rng=rng.child("party", pid)) for pid in parts}
    announced = {}
    for pid in parts:
        announced[pid] = init_announce(crs, states[pid], parts, states[pid].rng.child("init"))
        if announce is not None:
            announced[pid] = announce(pid, announced[pid])
    directory, qual = qualify(crs, announced, parts)
    finish_init(directory, states)
    return directory, states


def finish_init(directory: PublicDirectory, states: dict) -> None:
    ren = directory.renumbering
    for pid, st in states.items():
        st.qual = tuple(directory.dealers)
        if pid in ren:
            st.id_qual = ren[pid]
            st.my_keys = {ren[d]: kp for d, kp in st.my_keys.items() if d in ren} if ren[pid] <= directory.n_holders else {}
        else:
            st.id_qual = None
            st.my_keys = {}


def drng_randgen_round1(state: ParticipantState, crs: PvssPublicParams, directory: PublicDirectory,
                        rng: Rng | None = None) -> SharingTranscript:
    if state.id_qual is None:
        raise BeaconError("not-qualified", f"participant {state.id_original}")
    state.advance(Phase.IDLE, Phase.SHARED)
    rng = rng or state.epoch_rng("share")
    state.secret = rng.randbelow(crs.params.p)
    return pvss_share(crs, directory.pks(state.id_qual), state.secret, directory.n_holders,
                      crs.params.t, rng, dealer=state.id_qual,
                      context=share_context(state.epoch, state.id_original))


def valid_sharings(crs: PvssPublicParams, directory: PublicDirectory, epoch: int, sharings: dict) -> tuple:
    """QUAL' computed from the broadcast sharing transcripts."""
    good = []
    for i in sorted(sharings):
        tr = sharings[i]
        if i not in directory.dealers or tr.dealer != i:
            continue
        if pvss_sharever(crs, directory.pks(i), directory.n_holders, crs.params.t, tr,
                         share_context(epoch, directory.original(i))):
            good.append(i)
    return tuple(good)


def drng_randgen_round2(state: ParticipantState, crs: PvssPublicParams, directory: PublicDirectory,
                        received: dict, rng: Rng | None = None) -> dict:
    """Verify round-1 transcripts, fix QUAL' and reveal own shares: {dealer qid: DecryptionShare}."""
    state.advance(Phase.SHARED, Phase.REVEALED)
    state.qual_prime = valid_sharings(crs, directory, state.epoch, received)
    if not state.is_holder or state.id_qual not in state.qual_prime:
        return {}
    rng = rng or state.epoch_rng("reveal")
    j = state.id_qual
    out = {}
    for i in state.qual_prime:
        ct = received[i].ciphertexts[j - 1]
        out[i] = pvss_dec(crs, state.my_keys[i], ct, rng, holder=j,
                          context=dec_context(state.epoch, directory.original(i), state.id_original))
    return out


def _verified_share_sets(crs, directory, epoch, qual_prime, sharings, reveals) -> dict:
    sets = {}
    for i in qual_prime:
        ok = []
        for j in qual_prime:
            ds = reveals.get((i, j))
            if ds is None or j not in directory.holders or ds.holder != j:
                continue
            ct = sharings[i].ciphertexts[j - 1]
            ctx = dec_context(epoch, directory.original(i), directory.original(j))
            if pvss_decver(crs, directory.announcements[(i, j)].pk_b, ct, ds, ctx):
                ok.append(j)
        sets[i] = tuple(ok)
    return sets


def _combine_all(crs, qual_prime, share_sets, reveals) -> tuple[dict, int | None]:
    p, t = crs.params.p, crs.params.t
    secrets = {}
    for i in qual_prime:
        s = pvss_combine(crs, share_sets[i], {j: reveals[(i, j)].share for j in share_sets[i]}, t)
        if s is not None:
            secrets[i] = s
    omega = sum(secrets.values()) % p if len(secrets) == len(qual_prime) else None
    return secrets, omega


def drng_finalize(crs: PvssPublicParams, directory: PublicDirectory, epoch: int,
                  sharings: dict, reveals: dict) -> EpochRecord:
    """Deterministic in the broadcast record, so every honest node gets the same result."""
    qual_prime = valid_sharings(crs, directory, epoch, sharings)
    share_sets = _verified_share_sets(crs, directory, epoch, qual_prime, sharings, reveals)
    secrets, omega = _combine_all(crs, qual_prime, share_sets, reveals)
    return EpochRecord(epoch, qual_prime, dict(sorted(sharings.items())), dict(sorted(reveals.items())),
                       share_sets, secrets, omega)


def verify_directory(crs: PvssPublicParams, directory: PublicDirectory) -> bool:
    try:
        if set(directory.announcements) != {(i, j) for i in directory.dealers for j in directory.holders}:
            return False
        return all(pvss_keyver(crs, ka, key_context(directory.original(i), directory.original(j)))
                   for (i, j), ka in directory.announcements.items())
    except (BeaconError, IndexError, KeyError, TypeError, ValueError):
        return False


def drng_ver(crs: PvssPublicParams, directory: PublicDirectory, record: EpochRecord,
             check_keys: bool = True) -> bool:
    """Public verification of one epoch from the crs, directory and record alone."""
    try:
        if check_keys and not verify_directory(crs, directory):
            return False
        qual_prime = valid_sharings(crs, directory, record.epoch, record.sharings)
        if tuple(record.qual_prime) != qual_prime:
            return False
        if any(i not in directory.dealers or j not in directory.holders for (i, j) in record.reveals):
            return False
        share_sets = _verified_share_sets(crs, directory, record.epoch, qual_prime,
                                          record.sharings, record.reveals)
        if {i: tuple(s) for i, s in record.share_sets.items()} != share_sets:
            return False
        secrets, omega = _combine_all(crs, qual_prime, share_sets, record.reveals)
        return secrets == dict(record.secrets) and omega == record.omega
    except (BeaconError, IndexError, KeyError, TypeError, ValueError):
        return False


def join_announce_one(crs: PvssPublicParams, state: ParticipantState, joiner: int,
                     new_qid: int) -> KeyAnnouncement:
    """A holder's key for a joining dealer; the secret key is kept under ``new_qid``."""
    ka, kp = pvss_keygen(crs, state.rng.child("join", joiner), key_context(joiner, state.id_original))
    state.my_keys[new_qid] = kp
    return ka


def join_announce(crs: PvssPublicParams, directory: PublicDirectory, states: dict, joiner: int) -> dict:
    """Every holder generates its key for the new dealer: {holder qid: KeyAnnouncement}."""
    new_qid = len(directory.qual) + 1
    return {st.id_qual: join_announce_one(crs, st, joiner, new_qid)
            for st in states.values() if st.id_qual is not None and st.is_holder}


def drng_join(crs: PvssPublicParams, directory: PublicDirectory, joiner: int,
              announcements: dict) -> PublicDirectory:
    """Admit a dealer-only participant between epochs.

    Existing announcements are kept unchanged. The joiner's original id must
    exceed every existing one so that renumbering stays order-preserving
    without shifting anybody. If any key fails to verify the original
    directory is returned.
    """
    if directory.qual and joiner <= directory.qual[-1]:
        raise BeaconError("join-order", f"joiner id {joiner} must exceed {directory.qual[-1]}")
    if set(announcements) != set(directory.holders):
        return directory
    for j in directory.holders:
        if not pvss_keyver(crs, announcements[j], key_context(joiner, directory.original(j))):
            return directory
    new_qid = len(directory.qual) + 1
    anns = dict(directory.announcements)
    for j in directory.holders:
        anns[(new_qid, j)] = announcements[j]
    return PublicDirectory(dict(sorted(anns.items())), directory.qual + (joiner,), directory.n_holders)


def admit_joiner(directory: PublicDirectory, states: dict, joiner: int, rng: Rng) -> None:
    """Create the joiner's state after a successful :func:`drng_join`; undo holder keys otherwise."""
    ren = directory.renumbering
    if joiner in ren:
        states[joiner] = ParticipantState(joiner, ren[joiner], {}, tuple(directory.dealers),
                                          rng=rng.child("party", joiner))
        for st in states.values():
            st.qual = tuple(directory.dealers)
    else:
        stale = len(directory.qual) + 1
        for st in states.values():
            st.my_keys.pop(stale, None)


def run_epoch(crs: PvssPublicParams, directory: PublicDirectory, states: dict, epoch: int) -> EpochRecord:
    """All-honest epoch without a network, mainly for tests."""
    active = [st for st in states.values() if st.id_qual is not None]
    for st in active:
        st.start_epoch(epoch)
    sharings = {st.id_qual: drng_randgen_round1(st, crs, directory) for st in active}
    reveals = {}
    for st in active:
        for i, ds in drng_randgen_round2(st, crs, directory, sharings).items():
            reveals[(i, st.id_qual)] = ds
    for st in active:
        st.phase = Phase.DONE
    return drng_finalize(crs, directory, epoch, sharings, reveals)
