"""Executable PVSS security games: reconstruction correctness, a library of
cheating strategies against verification, and a ciphertext indistinguishability
smoke test.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .core import Rng
from .pke import Ciphertext, pke_decrypt, pke_encrypt
from .pvss import (DecryptionShare, KeyAnnouncement, PvssPublicParams, SharingTranscript, pvss_combine,
                   pvss_dec, pvss_decver, pvss_keygen, pvss_keyver, pvss_share, pvss_sharever,
                   share_parity)
from .shamir import is_valid_share_vector


def correctness_game(pp: PvssPublicParams, n: int, t: int, corrupted, rng: Rng) -> int:
    """Honest dealer, adversarial minority; 1 iff every check an honest run must pass does.

    Corrupted parties pick at random between a garbage key proof (and get
    excluded) or honest keys followed by either an honest or an off-by-one
    decryption share.
    """
    corrupted = set(corrupted)
    if len(corrupted) > t:
        return 0
    adv = rng.child("adversary")
    keys, anns = {}, {}
    for i in range(1, n + 1):
        ka, kp = pvss_keygen(pp, rng.child("key", i), b"slot=%d" % i)
        if i in corrupted and adv.randbelow(3) == 0:
            ka = KeyAnnouncement(adv.uniform_mod(pp.params.q, pp.params.u), ka.proof0)
        keys[i], anns[i] = kp, ka
    verdict = {i: pvss_keyver(pp, anns[i], b"slot=%d" % i) for i in anns}
    if any(not verdict[i] for i in anns if i not in corrupted):
        return 0
    good = [i for i in sorted(anns) if verdict[i]]
    n2 = len(good)
    if t >= n2:
        return 0
    s = rng.randbelow(pp.params.p)
    pks = [anns[i].pk_b for i in good]
    tr = pvss_share(pp, pks, s, n2, t, rng.child("share"))
    if not pvss_sharever(pp, pks, n2, t, tr):
        return 0
    shares = {}
    for k, i in enumerate(good, start=1):
        ct = tr.ciphertexts[k - 1]
        ds = pvss_dec(pp, keys[i], ct, rng.child("dec", i), holder=k)
        if i in corrupted and adv.randbelow(2):
            ds = DecryptionShare(k, (ds.share + 1) % pp.params.p, ds.proof2)
        ok = pvss_decver(pp, pks[k - 1], ct, ds)
        if i not in corrupted and not ok:
            return 0
        if ok:
            shares[k] = ds.share
    if len(shares) < t + 1:
        return 0
    for size in range(t + 1, len(shares) + 1):
        for subset in itertools.combinations(sorted(shares), size):
            if pvss_combine(pp, subset, shares, t) != s:
                return 0
    return 1


@dataclass(frozen=True)
class CheatOutcome:
    rejected: bool
    violates: bool  # the cheating object lies outside the relation (None-free: best knowledge)

    @property
    def game_output(self) -> int:
        """1 when a relation-violating object passed verification."""
        return int(self.violates and not self.rejected)


class CheatBench:
    """Fixed honest keys for n holders; each strategy builds a fresh cheat per trial."""

    def __init__(self, pp: PvssPublicParams, n: int, t: int, rng: Rng):
        self.pp, self.n, self.t = pp, n, t
        self.keys, self.anns = [], []
        for i in range(1, n + 1):
            ka, kp = pvss_keygen(pp, rng.child("bench-key", i), b"slot=%d" % i)
            self.keys.append(kp)
            self.anns.append(ka)
        self.pks = [ka.pk_b for ka in self.anns]

    def share(self, s: int, rng: Rng, context: bytes = b"") -> SharingTranscript:
        return pvss_share(self.pp, self.pks, s, self.n, self.t, rng, context=context)

    def decrypt_all(self, tr: SharingTranscript) -> list[int]:
        return [pke_decrypt(self.pp.a_mat, kp.pk_b, kp.sk_s, ct, self.pp.params).message
                for kp, ct in zip(self.keys, tr.ciphertexts)]

    def codeword(self, messages) -> bool:
        p = self.pp.params.p
        h = share_parity(self.n, self.t, p)
        return h.shape[1] == 0 or is_valid_share_vector(messages, h, p)

    def sharever(self, tr, t=None, context=b"") -> bool:
        return pvss_sharever(self.pp, self.pks, self.n, self.t if t is None else t, tr, context)


def _mutate_proof(proof, rng: Rng):
    z = proof.responses.copy()
    r = rng.randbelow(z.shape[0])
    c = rng.randbelow(z.shape[1])
    z[r, c] += 1 + rng.randbelow(3)
    return type(proof)(proof.commitments, proof.challenges, z)


def key_random_pk(b: CheatBench, rng: Rng) -> CheatOutcome:
    ka, _ = pvss_keygen(b.pp, rng, b"slot=1")
    forged = KeyAnnouncement(rng.uniform_mod(b.pp.params.q, b.pp.params.u), ka.proof0)
    return CheatOutcome(not pvss_keyver(b.pp, forged, b"slot=1"), True)


def key_mix_and_match(b: CheatBench, rng: Rng) -> CheatOutcome:
    ka1, _ = pvss_keygen(b.pp, rng.child("a"), b"slot=1")
    ka2, _ = pvss_keygen(b.pp, rng.child("b"), b"slot=1")
    return CheatOutcome(not pvss_keyver(b.pp, KeyAnnouncement(ka1.pk_b, ka2.proof0), b"slot=1"), False)


def key_mutated_response(b: CheatBench, rng: Rng) -> CheatOutcome:
    ka, _ = pvss_keygen(b.pp, rng, b"slot=1")
    bent = KeyAnnouncement(ka.pk_b, _mutate_proof(ka.proof0, rng))
    return CheatOutcome(not pvss_keyver(b.pp, bent, b"slot=1"), False)


def key_replay_context(b: CheatBench, rng: Rng) -> CheatOutcome:
    ka, _ = pvss_keygen(b.pp, rng, b"slot=1")
    return CheatOutcome(not pvss_keyver(b.pp, ka, b"slot=2"), False)


def share_reordered(b: CheatBench, rng: Rng) -> CheatOutcome:
    p = b.pp.params.p
    tr = b.share(rng.randbelow(p), rng)
    i, j = 0, 1 + rng.randbelow(b.n - 1)
    cts = list(tr.ciphertexts)
    cts[i], cts[j] = cts[j], cts[i]
    bent = SharingTranscript(tr.dealer, tuple(cts), tr.proof1)
    # decryption under the swapped keys is garbage, so treat as violating
    return CheatOutcome(not b.sharever(bent), True)


def share_splice(b: CheatBench, rng: Rng) -> CheatOutcome:
    p = b.pp.params.p
    s_a = rng.randbelow(p)
    s_b = (s_a + 1 + rng.randbelow(p - 1)) % p
    tr_a, tr_b = b.share(s_a, rng.child("a")), b.share(s_b, rng.child("b"))
    cts = (tr_a.ciphertexts[0],) + tr_b.ciphertexts[1:]
    bent = SharingTranscript(0, cts, tr_b.proof1)
    return CheatOutcome(not b.sharever(bent), not b.codeword(b.decrypt_all(bent)))


def share_reencrypt(b: CheatBench, rng: Rng) -> CheatOutcome:
    params = b.pp.params
    tr = b.share(rng.randbelow(params.p), rng)
    m = b.decrypt_all(tr)
    ct, _ = pke_encrypt(b.pp.a_mat, b.pks[0], (m[0] + 1) % params.p, params, rng)
    bent = SharingTranscript(0, (ct,) + tr.ciphertexts[1:], tr.proof1)
    return CheatOutcome(not b.sharever(bent), not b.codeword(b.decrypt_all(bent)))


def share_wrong_threshold(b: CheatBench, rng: Rng) -> CheatOutcome:
    tr = b.share(rng.randbelow(b.pp.params.p), rng)
    t2 = b.t - 1 if b.t > 0 else b.t + 1
    return CheatOutcome(not b.sharever(tr, t=t2), t2 < b.t)


def share_replay(b: CheatBench, rng: Rng) -> CheatOutcome:
    tr = b.share(rng.randbelow(b.pp.params.p), rng, context=b"epoch=1")
    return CheatOutcome(not b.sharever(tr, context=b"epoch=2"), False)


def dec_share_plus_one(b: CheatBench, rng: Rng) -> CheatOutcome:
    p = b.pp.params.p
    tr = b.share(rng.randbelow(p), rng)
    k = rng.randbelow(b.n)
    ds = pvss_dec(b.pp, b.keys[k], tr.ciphertexts[k], rng, holder=k + 1)
    bent = DecryptionShare(ds.holder, (ds.share + 1) % p, ds.proof2)
    return CheatOutcome(not pvss_decver(b.pp, b.pks[k], tr.ciphertexts[k], bent), True)


def dec_cross_ciphertext(b: CheatBench, rng: Rng) -> CheatOutcome:
    params = b.pp.params
    k = rng.randbelow(b.n)
    ct_j, _ = pke_encrypt(b.pp.a_mat, b.pks[k], rng.randbelow(params.p), params, rng)
    ct_k, _ = pke_encrypt(b.pp.a_mat, b.pks[k], rng.randbelow(params.p), params, rng)
    ds = pvss_dec(b.pp, b.keys[k], ct_j, rng, holder=k + 1)
    truth = pke_decrypt(b.pp.a_mat, b.pks[k], b.keys[k].sk_s, ct_k, params).message
    return CheatOutcome(not pvss_decver(b.pp, b.pks[k], ct_k, ds), truth != ds.share)


def dec_mutated_c2(b: CheatBench, rng: Rng) -> CheatOutcome:
    params = b.pp.params
    k = rng.randbelow(b.n)
    ct, _ = pke_encrypt(b.pp.a_mat, b.pks[k], rng.randbelow(params.p), params, rng)
    ds = pvss_dec(b.pp, b.keys[k], ct, rng, holder=k + 1)
    bent = Ciphertext(ct.c1, (ct.c2 + 1 + rng.randbelow(params.q - 1)) % params.q)
    truth = pke_decrypt(b.pp.a_mat, b.pks[k], b.keys[k].sk_s, bent, params).message
    return CheatOutcome(not pvss_decver(b.pp, b.pks[k], bent, ds), truth != ds.share)


CHEATS = {
    "key-random-pk": key_random_pk,
    "key-mix-and-match": key_mix_and_match,
    "key-mutated-response": key_mutated_response,
    "key-replay-context": key_replay_context,
    "share-reordered": share_reordered,
    "share-splice": share_splice,
    "share-reencrypt-plus-one": share_reencrypt,
    "share-wrong-threshold": share_wrong_threshold,
    "share-replay": share_replay,
    "dec-share-plus-one": dec_share_plus_one,
    "dec-cross-ciphertext": dec_cross_ciphertext,
    "dec-mutated-c2": dec_mutated_c2,
}


def run_cheat(name: str, bench: CheatBench, trials: int, rng: Rng) -> tuple[int, int]:
    """(rejections, game wins) over ``trials`` fresh attempts."""
    fn = CHEATS[name]
    rejected = wins = 0
    for k in range(trials):
        out = fn(bench, rng.child(name, k))
        rejected += out.rejected
        wins += out.game_output
    return rejected, wins


def ciphertext_smoke_test(pp: PvssPublicParams, s0: int, s1: int, samples: int, rng: Rng) -> float:
    """Welch t-test p-value comparing c2 residues of encryptions of s0 and s1 under one key."""
    _, kp = pvss_keygen(pp, rng.child("key"))
    draws = {}
    for label, m in (("a", s0), ("b", s1)):
        r = rng.child("enc", label)
        draws[label] = np.array([pke_encrypt(pp.a_mat, kp.pk_b, m, pp.params, r)[0].c2
                                 for _ in range(samples)], dtype=np.float64)
    return float(stats.ttest_ind(draws["a"], draws["b"], equal_var=False).pvalue)
