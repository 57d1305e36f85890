"""Short-preimage proofs for linear relations M w = t (mod q).

The ``sigma-fs`` backend runs ``rep`` parallel binary-challenge Sigma
protocols with Gaussian masking and derives all challenge bits at once from a
hash of the CRS, the statement and every commitment. Because the challenges
are joint, a rejection in any repetition restarts the whole proof; per
repetition challenges would let a prover grind each bit separately.
"""

from __future__ import annotations

import hashlib
import math
import threading
from collections import OrderedDict
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import (Rng, centered, int_width, mat_mul_mod, norm_l2, row_norms, sample_gaussian,
                   tail_cut_for)
from .encoding import Reader, Writer
from .errors import BeaconError, DecodeError
from .params import SystemParams

RELATIONS = ("key", "share", "dec")
BACKENDS = ("sigma-fs",)
MASK_FACTOR = 11
# Rejection constant: log M = pi*|w|^2/sigma^2 + RS_TAIL * sqrt(2 pi) * |w| / sigma,
# i.e. the acceptance ratio is capped RS_TAIL standard deviations out.
RS_TAIL = 2.0
MAX_ATTEMPTS = 1000


@dataclass(frozen=True)
class ProofCrs:
    relation: str
    crs_bytes: bytes
    backend: str = "sigma-fs"


def proof_setup(relation_id: str, params: SystemParams, rng: Rng) -> ProofCrs:
    if relation_id not in RELATIONS:
        raise BeaconError("invalid-params", f"unknown relation {relation_id!r}")
    if params.backend not in BACKENDS:
        raise BeaconError("invalid-params", f"unknown proof backend {params.backend!r}")
    return ProofCrs(relation_id, rng.child("crs", relation_id).bytes(32), params.backend)


@dataclass(frozen=True, eq=False)
class LinearStatement:
    m_mat: np.ndarray
    target: np.ndarray
    bound_zk: float
    slack: float
    domain_tag: bytes
    q: int
    rep: int

    @property
    def sigma_mask(self) -> float:
        return MASK_FACTOR * self.bound_zk

    @property
    def verify_bound(self) -> float:
        return self.slack * self.bound_zk

    @cached_property
    def encoded(self) -> bytes:
        w = Writer(int_width(self.q))
        w.blob(self.domain_tag).u64(self.q).u64(self.rep).f64(self.bound_zk).f64(self.slack)
        return w.zq_mat(self.m_mat).zq_vec(self.target).getvalue()


def make_statement(m_mat, target, bound_zk: float, tag: bytes, params: SystemParams) -> LinearStatement:
    m_mat = np.asarray(m_mat, dtype=np.int64) % params.q
    width = m_mat.shape[1]
    slack = MASK_FACTOR * math.sqrt(2 * width)
    return LinearStatement(m_mat, np.asarray(target, dtype=np.int64) % params.q, float(bound_zk),
                           slack, bytes(tag), params.q, params.rep)


@dataclass(frozen=True, eq=False)
class Proof:
    commitments: np.ndarray  # rep x k residues
    challenges: np.ndarray  # rep bits
    responses: np.ndarray  # rep x w integers

    @property
    def rep(self) -> int:
        return len(self.challenges)

    def write(self, w: Writer) -> Writer:
        return w.zq_rows(self.commitments).bits(self.challenges).z_rows(self.responses)

    @classmethod
    def read(cls, r: Reader) -> Proof:
        commitments = r.zq_rows()
        challenges = r.bits()
        responses = r.z_rows()
        if not (len(commitments) == len(challenges) == len(responses)):
            raise DecodeError("malformed", "proof lists differ in length")
        return cls(commitments, challenges, responses)

    def to_bytes(self, width: int) -> bytes:
        return self.write(Writer(width)).getvalue()


def _commitment_bytes(commitments: np.ndarray, width: int) -> bytes:
    return Writer(width).zq_rows(commitments).getvalue()


def derive_challenges(crs: ProofCrs, stmt: LinearStatement, commitments: np.ndarray) -> np.ndarray:
    h = hashlib.shake_256(b"latbeacon/challenge")
    h.update(len(crs.crs_bytes).to_bytes(8, "little") + crs.crs_bytes)
    h.update(crs.relation.encode() + b"\x00")
    h.update(stmt.encoded)
    h.update(_commitment_bytes(commitments, int_width(stmt.q)))
    raw = np.frombuffer(h.digest((stmt.rep + 7) // 8), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:stmt.rep].copy()


def check_witness(stmt: LinearStatement, witness: np.ndarray) -> bool:
    witness = np.asarray(witness, dtype=np.int64)
    if witness.shape != (stmt.m_mat.shape[1],):
        return False
    lhs = mat_mul_mod(stmt.m_mat, witness, stmt.q)
    return bool(np.array_equal(lhs, stmt.target)) and norm_l2(witness) <= stmt.bound_zk


def rejection_accept(z: np.ndarray, witness: np.ndarray, sigma: float, rng: Rng) -> np.ndarray:
    """Accept rows z ~ y + w so that accepted rows follow D_sigma.

    The acceptance probability is rho(z) / (M rho(z - w)), capped at one.
    """
    wn = norm_l2(witness)
    log_m = math.pi * wn * wn / sigma**2 + RS_TAIL * math.sqrt(2 * math.pi) * wn / sigma
    zw = np.asarray(z, dtype=np.float64) @ witness.astype(np.float64)
    log_ratio = -math.pi * (2 * zw - wn * wn) / sigma**2 - log_m
    u = rng.floats(len(zw))
    return u < np.exp(np.minimum(log_ratio, 0.0))


def prove(crs: ProofCrs, stmt: LinearStatement, witness, rng: Rng) -> Proof:
    witness = np.asarray(witness, dtype=np.int64)
    if not check_witness(stmt, witness):
        raise BeaconError("witness-invalid", "relation or norm bound fails")
    sigma = stmt.sigma_mask
    tc = tail_cut_for(sigma)
    k, width = stmt.m_mat.shape
    for _ in range(MAX_ATTEMPTS):
        y = sample_gaussian(sigma, (stmt.rep, width), rng, tc)
        commitments = mat_mul_mod(stmt.m_mat, y.T, stmt.q).T.reshape(stmt.rep, k)
        bits = derive_challenges(crs, stmt, commitments)
        z = y + bits[:, None].astype(np.int64) * witness[None, :]
        hot = np.flatnonzero(bits)
        if hot.size and not rejection_accept(z[hot], witness, sigma, rng).all():
            continue
        if row_norms(z).max(initial=0.0) > stmt.verify_bound:
            continue
        return Proof(commitments, bits, z)
    raise BeaconError("retry-exhausted", "rejection sampling did not terminate")


class _VerifyCache:
    """Memo for verify(); it is a pure function of the hashed bytes."""

    def __init__(self, size: int = 200_000):
        self.size = size
        self.data: OrderedDict[bytes, bool] = OrderedDict()
        self.lock = threading.Lock()

    def get(self, key: bytes):
        with self.lock:
            hit = self.data.get(key)
            if hit is not None:
                self.data.move_to_end(key)
            return hit

    def put(self, key: bytes, value: bool) -> None:
        with self.lock:
            self.data[key] = value
            if len(self.data) > self.size:
                self.data.popitem(last=False)

    def clear(self) -> None:
        with self.lock:
            self.data.clear()


verify_cache = _VerifyCache()


def _verify_uncached(crs: ProofCrs, stmt: LinearStatement, proof: Proof) -> bool:
    k, width = stmt.m_mat.shape
    a, bits, z = proof.commitments, proof.challenges, proof.responses
    if a.shape != (stmt.rep, k) or bits.shape != (stmt.rep,) or z.shape != (stmt.rep, width):
        return False
    if a.size and (a.min() < 0 or a.max() >= stmt.q):
        return False
    if not np.array_equal(bits, derive_challenges(crs, stmt, a)):
        return False
    if z.size and np.abs(z).max() > stmt.verify_bound:
        return False
    if row_norms(z).max(initial=0.0) > stmt.verify_bound:
        return False
    lhs = mat_mul_mod(stmt.m_mat, z.T, stmt.q).T
    rhs = (a + bits[:, None].astype(np.int64) * stmt.target[None, :]) % stmt.q
    return bool(np.array_equal(lhs, rhs))


def verify(crs: ProofCrs, stmt: LinearStatement, proof: Proof | None) -> bool:
    if proof is None or crs.backend not in BACKENDS:
        return False
    try:
        key = hashlib.sha256(crs.crs_bytes + crs.relation.encode() + b"\x00" + stmt.encoded
                             + proof.to_bytes(int_width(stmt.q))).digest()
    except (ValueError, OverflowError):
        return False
    hit = verify_cache.get(key)
    if hit is None:
        try:
            hit = _verify_uncached(crs, stmt, proof)
        except (ValueError, OverflowError, BeaconError):
            hit = False
        verify_cache.put(key, hit)
    return hit


# -- the three relations ---------------------------------------------------

def key_bound(params: SystemParams) -> float:
    return math.sqrt(params.v + params.u) * params.sigma_key * math.sqrt(2)


def build_key_statement(a_mat, pk_b, params: SystemParams, tag: bytes = b"") -> LinearStatement:
    a_mat = np.asarray(a_mat)
    pk_b = np.asarray(pk_b)
    if a_mat.shape != (params.v, params.u) or pk_b.shape != (params.u,):
        raise BeaconError("dimension-mismatch", "key statement shapes")
    m_mat = np.hstack([a_mat.T, np.eye(params.u, dtype=np.int64)])
    return make_statement(m_mat, pk_b, key_bound(params), b"key|" + tag, params)


def key_witness(keypair) -> np.ndarray:
    return np.concatenate([keypair.sk_s, keypair.noise_e])


def share_bound(n: int, params: SystemParams) -> float:
    tc = tail_cut_for(params.sigma_noise)
    return math.sqrt(n) * math.sqrt(params.u * params.r_enc**2 + tc**2 + params.p**2)


def build_share_statement(a_mat, pks, ciphertexts, h_mat, params: SystemParams,
                          tag: bytes = b"") -> LinearStatement:
    """Witness layout: (r_1..r_n, e_1..e_n, m_1..m_n)."""
    n = len(ciphertexts)
    u, v, p = params.u, params.v, params.p
    h_mat = np.asarray(h_mat, dtype=np.int64).reshape(n, -1) if n else np.zeros((0, 0), np.int64)
    if len(pks) != n or h_mat.shape[0] != n:
        raise BeaconError("dimension-mismatch", "share statement sizes")
    a_mat = np.asarray(a_mat, dtype=np.int64)
    if a_mat.shape != (v, u):
        raise BeaconError("dimension-mismatch", "A shape")
    cols = n * u + 2 * n
    rows = n * (v + 1) + h_mat.shape[1]
    m_mat = np.zeros((rows, cols), dtype=np.int64)
    target = np.zeros(rows, dtype=np.int64)
    for i, (pk, ct) in enumerate(zip(pks, ciphertexts)):
        pk = np.asarray(pk, dtype=np.int64)
        c1 = np.asarray(ct.c1, dtype=np.int64)
        if pk.shape != (u,) or c1.shape != (v,):
            raise BeaconError("dimension-mismatch", "key or ciphertext length")
        top = i * (v + 1)
        m_mat[top:top + v, i * u:(i + 1) * u] = a_mat
        target[top:top + v] = c1
        m_mat[top + v, i * u:(i + 1) * u] = pk
        m_mat[top + v, n * u + i] = 1
        m_mat[top + v, n * u + n + i] = p
        target[top + v] = ct.c2
    if h_mat.shape[1]:
        m_mat[n * (v + 1):, n * u + n:] = (p * h_mat.T) % params.q
    return make_statement(m_mat, target, share_bound(n, params), b"share|" + tag, params)


def share_witness(rs, es, messages, p: int) -> np.ndarray:
    return np.concatenate([np.concatenate(rs) if len(rs) else np.zeros(0, np.int64),
                           np.asarray(es, dtype=np.int64),
                           centered(np.asarray(messages, dtype=np.int64), p)]).astype(np.int64)


def dec_bound(params: SystemParams) -> float:
    return math.sqrt(key_bound(params) ** 2 + ((params.p - 1) / 2) ** 2)


def build_dec_statement(a_mat, pk_b, ct, claimed_share: int, params: SystemParams,
                        tag: bytes = b"") -> LinearStatement:
    """Witness layout: (s, e, f) with c2 - p*share = <s, c1> + f."""
    if not 0 <= claimed_share < params.p:
        raise BeaconError("share-out-of-range", f"{claimed_share}")
    u, v = params.u, params.v
    a_mat = np.asarray(a_mat, dtype=np.int64)
    pk_b = np.asarray(pk_b, dtype=np.int64)
    c1 = np.asarray(ct.c1, dtype=np.int64)
    if a_mat.shape != (v, u) or pk_b.shape != (u,) or c1.shape != (v,):
        raise BeaconError("dimension-mismatch", "dec statement shapes")
    m_mat = np.zeros((u + 1, v + u + 1), dtype=np.int64)
    m_mat[:u, :v] = a_mat.T
    m_mat[:u, v:v + u] = np.eye(u, dtype=np.int64)
    m_mat[u, :v] = c1
    m_mat[u, v + u] = 1
    target = np.concatenate([pk_b, [(ct.c2 - params.p * claimed_share) % params.q]])
    return make_statement(m_mat, target, dec_bound(params), b"dec|" + tag, params)


def dec_witness(keypair, f: int) -> np.ndarray:
    return np.concatenate([keypair.sk_s, keypair.noise_e, [f]]).astype(np.int64)
