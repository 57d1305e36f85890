"""Publicly verifiable secret sharing from the PKE, Shamir sharing and the proofs.

Verification functions never raise on adversarial input; anything malformed
is simply rejected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import proofs
from .core import Rng
from .encoding import Reader, Writer
from .errors import BeaconError
from .params import NoiseBudgetReport, SystemParams, validate_params
from .pke import Ciphertext, PkeKeyPair, pke_decrypt, pke_encrypt, pke_keygen, pke_setup
from .proofs import Proof, ProofCrs
from .shamir import parity_matrix, sss_combine, sss_share


@dataclass(frozen=True, eq=False)
class PvssPublicParams:
    a_mat: np.ndarray
    crs0: ProofCrs
    crs1: ProofCrs
    crs2: ProofCrs
    params: SystemParams
    report: NoiseBudgetReport
    seed: bytes


@dataclass(frozen=True, eq=False)
class KeyAnnouncement:
    pk_b: np.ndarray
    proof0: Proof | None

    def write(self, w: Writer) -> Writer:
        w.zq_vec(self.pk_b).flag(self.proof0 is not None)
        return self.proof0.write(w) if self.proof0 is not None else w

    @classmethod
    def read(cls, r: Reader) -> KeyAnnouncement:
        pk = r.zq_vec()
        return cls(pk, Proof.read(r) if r.flag() else None)


def write_ciphertext(w: Writer, ct: Ciphertext) -> Writer:
    return w.zq_vec(ct.c1).zq(ct.c2)


def read_ciphertext(r: Reader) -> Ciphertext:
    return Ciphertext(r.zq_vec(), r.zq())


@dataclass(frozen=True, eq=False)
class SharingTranscript:
    dealer: int
    ciphertexts: tuple
    proof1: Proof

    def write(self, w: Writer) -> Writer:
        w.u64(self.dealer).u64(len(self.ciphertexts))
        for ct in self.ciphertexts:
            write_ciphertext(w, ct)
        return self.proof1.write(w)

    @classmethod
    def read(cls, r: Reader) -> SharingTranscript:
        dealer = r.u64()
        cts = tuple(read_ciphertext(r) for _ in range(r.length(9)))
        return cls(dealer, cts, Proof.read(r))


@dataclass(frozen=True, eq=False)
class DecryptionShare:
    holder: int
    share: int
    proof2: Proof

    def write(self, w: Writer) -> Writer:
        return self.proof2.write(w.u64(self.holder).zq(self.share))

    @classmethod
    def read(cls, r: Reader) -> DecryptionShare:
        return cls(r.u64(), r.zq(), Proof.read(r))


def pvss_setup(params: SystemParams, seed: bytes) -> PvssPublicParams:
    params.check()
    report = validate_params(params)
    if not report.ok:
        raise BeaconError("invalid-params", report.summary())
    rng = Rng(seed)
    a_mat = pke_setup(params, rng.child("A"))
    crs = [proofs.proof_setup(rel, params, rng) for rel in proofs.RELATIONS]
    return PvssPublicParams(a_mat, *crs, params, report, bytes(seed))


def share_parity(n: int, t: int, p: int) -> np.ndarray:
    """Parity matrix, or an n x 0 matrix when every vector is a codeword."""
    if n - t - 1 <= 0:
        return np.zeros((n, 0), dtype=np.int64)
    return parity_matrix(n, t, p)


def _residues_ok(arr, length: int, q: int) -> bool:
    arr = np.asarray(arr)
    return arr.shape == (length,) and (arr.size == 0 or (arr.min() >= 0 and arr.max() < q))


def _ciphertext_ok(ct, params: SystemParams) -> bool:
    return (isinstance(ct, Ciphertext) and _residues_ok(ct.c1, params.v, params.q)
            and 0 <= ct.c2 < params.q)


def _share_tag(n: int, t: int, context: bytes) -> bytes:
    return b"n=%d|t=%d|" % (n, t) + context


def pvss_keygen(pp: PvssPublicParams, rng: Rng, context: bytes = b"") -> tuple[KeyAnnouncement, PkeKeyPair]:
    keypair = pke_keygen(pp.a_mat, pp.params, rng)
    stmt = proofs.build_key_statement(pp.a_mat, keypair.pk_b, pp.params, context)
    proof = proofs.prove(pp.crs0, stmt, proofs.key_witness(keypair), rng)
    return KeyAnnouncement(keypair.pk_b, proof), keypair


def pvss_keyver(pp: PvssPublicParams, ka: KeyAnnouncement, context: bytes = b"") -> bool:
    if not isinstance(ka, KeyAnnouncement) or not _residues_ok(ka.pk_b, pp.params.u, pp.params.q):
        return False
    stmt = proofs.build_key_statement(pp.a_mat, ka.pk_b, pp.params, context)
    return proofs.verify(pp.crs0, stmt, ka.proof0)


def pvss_share(pp: PvssPublicParams, pks, s: int, n: int, t: int, rng: Rng, *,
               dealer: int = 0, context: bytes = b"") -> SharingTranscript:
    params = pp.params
    if not 0 <= s < params.p:
        raise BeaconError("secret-out-of-range", f"s={s}")
    if len(pks) != n:
        raise BeaconError("dimension-mismatch", f"{len(pks)} keys for n={n}")
    shares, _ = sss_share(s, n, t, params.p, rng)
    cts, rs, es = [], [], []
    for i in range(1, n + 1):
        ct, (r, e) = pke_encrypt(pp.a_mat, np.asarray(pks[i - 1]), shares[i], params, rng)
        cts.append(ct)
        rs.append(r)
        es.append(e)
    stmt = proofs.build_share_statement(pp.a_mat, pks, cts, share_parity(n, t, params.p), params,
                                        _share_tag(n, t, context))
    witness = proofs.share_witness(rs, es, [shares[i] for i in range(1, n + 1)], params.p)
    return SharingTranscript(dealer, tuple(cts), proofs.prove(pp.crs1, stmt, witness, rng))


def pvss_sharever(pp: PvssPublicParams, pks, n: int, t: int, tr: SharingTranscript,
                  context: bytes = b"") -> bool:
    params = pp.params
    if not isinstance(tr, SharingTranscript) or not 0 <= t < n or n >= params.p:
        return False
    if len(pks) != n or len(tr.ciphertexts) != n:
        return False
    if not all(_ciphertext_ok(ct, params) for ct in tr.ciphertexts):
        return False
    if not all(_residues_ok(pk, params.u, params.q) for pk in pks):
        return False
    stmt = proofs.build_share_statement(pp.a_mat, pks, tr.ciphertexts, share_parity(n, t, params.p),
                                        params, _share_tag(n, t, context))
    return proofs.verify(pp.crs1, stmt, tr.proof1)


def pvss_dec(pp: PvssPublicParams, keypair: PkeKeyPair, ct: Ciphertext, rng: Rng, *,
             holder: int = 0, context: bytes = b"") -> DecryptionShare:
    wit = pke_decrypt(pp.a_mat, keypair.pk_b, keypair.sk_s, ct, pp.params)
    stmt = proofs.build_dec_statement(pp.a_mat, keypair.pk_b, ct, wit.message, pp.params, context)
    proof = proofs.prove(pp.crs2, stmt, proofs.dec_witness(keypair, wit.f), rng)
    return DecryptionShare(holder, wit.message, proof)


def pvss_decver(pp: PvssPublicParams, pk_b, ct: Ciphertext, ds: DecryptionShare,
                context: bytes = b"") -> bool:
    params = pp.params
    if not isinstance(ds, DecryptionShare) or not 0 <= ds.share < params.p:
        return False
    if not _ciphertext_ok(ct, params) or not _residues_ok(pk_b, params.u, params.q):
        return False
    stmt = proofs.build_dec_statement(pp.a_mat, pk_b, ct, ds.share, params, context)
    return proofs.verify(pp.crs2, stmt, ds.proof2)


def pvss_combine(pp: PvssPublicParams, indices, shares, t: int | None = None) -> int | None:
    """Reconstruct from the lowest t+1 indices; None stands for the failure symbol."""
    t = pp.params.t if t is None else t
    idx = sorted(set(indices))
    if len(idx) <= t:
        return None
    chosen = idx[:t + 1]
    return sss_combine(chosen, {i: shares[i] for i in chosen}, pp.params.p)
