"""Field-level tampering of transcript files, for exercising the verifier.

Each mutation returns a modified copy that still carries a valid integrity
digest once re-encoded, so rejection has to come from protocol verification.
Targets are chosen among the dealers in QUAL' and the holders in S_i: editing
a transcript that was already rejected leaves the record consistent and is
not a meaningful attack.
"""

from __future__ import annotations

from dataclasses import replace

from .core import Rng
from .drng import EpochRecord
from .pke import Ciphertext
from .proofs import Proof
from .pvss import DecryptionShare, SharingTranscript
from .transcript import TranscriptFile


def _pick(rng: Rng, items):
    items = sorted(items)
    return items[rng.randbelow(len(items))]


def _nonzero(rng: Rng, m: int) -> int:
    return 1 + rng.randbelow(m - 1)


def _epoch(tf: TranscriptFile, rng: Rng, need=lambda rec: True) -> int:
    return _pick(rng, [k for k, rec in enumerate(tf.records) if need(rec)])


def _with_record(tf: TranscriptFile, k: int, rec: EpochRecord) -> TranscriptFile:
    records = list(tf.records)
    records[k] = rec
    return replace(tf, records=records)


def _with_sharing(tf, k, i, tr):
    rec = tf.records[k]
    return _with_record(tf, k, replace(rec, sharings={**rec.sharings, i: tr}))


def _with_reveal(tf, k, key, ds):
    rec = tf.records[k]
    return _with_record(tf, k, replace(rec, reveals={**rec.reveals, key: ds}))


def _bump_proof_response(proof: Proof, rng: Rng) -> Proof:
    z = proof.responses.copy()
    r, c = rng.randbelow(z.shape[0]), rng.randbelow(z.shape[1])
    z[r, c] += _nonzero(rng, 7) * (1 if rng.randbelow(2) else -1)
    return Proof(proof.commitments, proof.challenges, z)


def omega_shift(tf, rng):
    k = _epoch(tf, rng, lambda r: r.omega is not None)
    rec = tf.records[k]
    return _with_record(tf, k, replace(rec, omega=(rec.omega + _nonzero(rng, tf.params.p)) % tf.params.p))


def omega_bottom_toggle(tf, rng):
    k = _epoch(tf, rng)
    rec = tf.records[k]
    new = None if rec.omega is not None else rng.randbelow(tf.params.p)
    return _with_record(tf, k, replace(rec, omega=new))


def epoch_relabel(tf, rng):
    k = _epoch(tf, rng)
    rec = tf.records[k]
    return _with_record(tf, k, replace(rec, epoch=rec.epoch + 1 + rng.randbelow(1000)))


def qual_drop(tf, rng):
    k = _epoch(tf, rng, lambda r: r.qual_prime)
    rec = tf.records[k]
    gone = _pick(rng, rec.qual_prime)
    return _with_record(tf, k, replace(rec, qual_prime=tuple(i for i in rec.qual_prime if i != gone)))


def qual_add(tf, rng):
    """Adds a dealer whose sharing was rejected, or an unknown id if there is none."""
    k = _epoch(tf, rng)
    rec = tf.records[k]
    outside = set(rec.sharings) - set(rec.qual_prime)
    extra = _pick(rng, outside) if outside else len(tf.directory.qual) + 1
    return _with_record(tf, k, replace(rec, qual_prime=tuple(sorted(set(rec.qual_prime) | {extra}))))


def _sharing_target(tf, rng):
    k = _epoch(tf, rng, lambda r: r.qual_prime)
    i = _pick(rng, tf.records[k].qual_prime)
    return k, i, tf.records[k].sharings[i]


def ciphertext_c1(tf, rng):
    k, i, tr = _sharing_target(tf, rng)
    j = rng.randbelow(len(tr.ciphertexts))
    ct = tr.ciphertexts[j]
    c1 = ct.c1.copy()
    pos = rng.randbelow(c1.size)
    c1[pos] = (c1[pos] + _nonzero(rng, tf.params.q)) % tf.params.q
    cts = list(tr.ciphertexts)
    cts[j] = Ciphertext(c1, ct.c2)
    return _with_sharing(tf, k, i, SharingTranscript(tr.dealer, tuple(cts), tr.proof1))


def ciphertext_c2(tf, rng):
    k, i, tr = _sharing_target(tf, rng)
    j = rng.randbelow(len(tr.ciphertexts))
    ct = tr.ciphertexts[j]
    cts = list(tr.ciphertexts)
    cts[j] = Ciphertext(ct.c1, (ct.c2 + _nonzero(rng, tf.params.q)) % tf.params.q)
    return _with_sharing(tf, k, i, SharingTranscript(tr.dealer, tuple(cts), tr.proof1))


def share_proof_response(tf, rng):
    k, i, tr = _sharing_target(tf, rng)
    return _with_sharing(tf, k, i, SharingTranscript(tr.dealer, tr.ciphertexts,
                                                     _bump_proof_response(tr.proof1, rng)))


def share_proof_commitment(tf, rng):
    k, i, tr = _sharing_target(tf, rng)
    a = tr.proof1.commitments.copy()
    r, c = rng.randbelow(a.shape[0]), rng.randbelow(a.shape[1])
    a[r, c] = (a[r, c] + _nonzero(rng, tf.params.q)) % tf.params.q
    pr = Proof(a, tr.proof1.challenges, tr.proof1.responses)
    return _with_sharing(tf, k, i, SharingTranscript(tr.dealer, tr.ciphertexts, pr))


def share_proof_challenge(tf, rng):
    k, i, tr = _sharing_target(tf, rng)
    bits = tr.proof1.challenges.copy()
    bits[rng.randbelow(bits.size)] ^= 1
    pr = Proof(tr.proof1.commitments, bits, tr.proof1.responses)
    return _with_sharing(tf, k, i, SharingTranscript(tr.dealer, tr.ciphertexts, pr))


def _reveal_target(tf, rng):
    k = _epoch(tf, rng, lambda r: any(r.share_sets.values()))
    rec = tf.records[k]
    i = _pick(rng, [d for d, s in rec.share_sets.items() if s])
    j = _pick(rng, rec.share_sets[i])
    return k, (i, j), rec.reveals[(i, j)]


def reveal_share_value(tf, rng):
    k, key, ds = _reveal_target(tf, rng)
    bent = DecryptionShare(ds.holder, (ds.share + _nonzero(rng, tf.params.p)) % tf.params.p, ds.proof2)
    return _with_reveal(tf, k, key, bent)


def reveal_proof(tf, rng):
    k, key, ds = _reveal_target(tf, rng)
    return _with_reveal(tf, k, key, DecryptionShare(ds.holder, ds.share, _bump_proof_response(ds.proof2, rng)))


def reveal_swap_dealers(tf, rng):
    """Replace holder j's reveal for dealer i with its reveal for another dealer."""
    k, (i, j), _ = _reveal_target(tf, rng)
    rec = tf.records[k]
    others = [d for (d, h) in rec.reveals if h == j and d != i]
    if not others:
        return reveal_share_value(tf, rng)
    return _with_reveal(tf, k, (i, j), rec.reveals[(_pick(rng, others), j)])


def share_set_alter(tf, rng):
    k = _epoch(tf, rng, lambda r: r.share_sets)
    rec = tf.records[k]
    i = _pick(rng, rec.share_sets)
    cur = set(rec.share_sets[i])
    missing = set(range(1, tf.directory.n_holders + 1)) - cur
    if cur and (not missing or rng.randbelow(2)):
        cur.discard(_pick(rng, cur))
    else:
        cur.add(_pick(rng, missing))
    return _with_record(tf, k, replace(rec, share_sets={**rec.share_sets, i: tuple(sorted(cur))}))


def secret_alter(tf, rng):
    k = _epoch(tf, rng, lambda r: r.secrets)
    rec = tf.records[k]
    i = _pick(rng, rec.secrets)
    new = (rec.secrets[i] + _nonzero(rng, tf.params.p)) % tf.params.p
    return _with_record(tf, k, replace(rec, secrets={**rec.secrets, i: new}))


def directory_key(tf, rng):
    """Not one of the per-epoch classes: tampers a key announcement in the directory."""
    d = tf.directory
    key = _pick(rng, d.announcements)
    ka = d.announcements[key]
    bent = replace(ka, proof0=_bump_proof_response(ka.proof0, rng))
    return replace(tf, directory=replace(d, announcements={**d.announcements, key: bent}))


MUTATIONS = {
    "omega-shift": omega_shift,
    "omega-bottom-toggle": omega_bottom_toggle,
    "epoch-relabel": epoch_relabel,
    "qual-prime-drop": qual_drop,
    "qual-prime-add": qual_add,
    "ciphertext-c1": ciphertext_c1,
    "ciphertext-c2": ciphertext_c2,
    "share-proof-response": share_proof_response,
    "share-proof-commitment": share_proof_commitment,
    "share-proof-challenge-bit": share_proof_challenge,
    "reveal-share-value": reveal_share_value,
    "reveal-proof": reveal_proof,
    "reveal-swap-dealers": reveal_swap_dealers,
    "share-set-alter": share_set_alter,
    "secret-alter": secret_alter,
}

EXTRA_MUTATIONS = {"directory-key-proof": directory_key}


def mutate(data: bytes, name: str, rng: Rng) -> bytes:
    fn = MUTATIONS.get(name) or EXTRA_MUTATIONS[name]
    return fn(TranscriptFile.decode(data), rng).encode()

