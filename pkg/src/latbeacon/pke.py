"""LWE-style public-key encryption over Z_q with q = p^2 and messages in Z_p."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Rng, centered_rep, mat_mul_mod, norm_l2, sample_gaussian
from .errors import BeaconError
from .params import NoiseBudgetReport, SystemParams, validate_params

KEYGEN_RETRIES = 100
ENCRYPT_RETRIES = 100

__all__ = [
    "Ciphertext", "DecryptionWitness", "NoiseBudgetReport", "PkeKeyPair", "pke_decrypt",
    "pke_encrypt", "pke_keygen", "pke_setup", "split_residue", "validate_params",
]


@dataclass(frozen=True, eq=False)
class PkeKeyPair:
    pk_b: np.ndarray
    sk_s: np.ndarray
    noise_e: np.ndarray


@dataclass(frozen=True, eq=False)
class Ciphertext:
    c1: np.ndarray
    c2: int

    def __eq__(self, other):
        return (isinstance(other, Ciphertext) and self.c2 == other.c2
                and np.array_equal(self.c1, other.c1))

    __hash__ = None


@dataclass(frozen=True)
class DecryptionWitness:
    message: int
    f: int


def pke_setup(params: SystemParams, rng: Rng) -> np.ndarray:
    params.check()
    return rng.uniform_mod(params.q, params.v * params.u).reshape(params.v, params.u)


def pke_keygen(a_mat: np.ndarray, params: SystemParams, rng: Rng) -> PkeKeyPair:
    v, u = a_mat.shape
    if (v, u) != (params.v, params.u):
        raise BeaconError("dimension-mismatch", f"A is {a_mat.shape}")
    sigma = params.sigma_key
    for _ in range(KEYGEN_RETRIES):
        s = sample_gaussian(sigma, v, rng)
        e = sample_gaussian(sigma, u, rng)
        if norm_l2(s) < math.sqrt(v) * sigma and norm_l2(e) < math.sqrt(u) * sigma:
            b = (mat_mul_mod(s[None, :], a_mat, params.q)[0] + e) % params.q
            return PkeKeyPair(b, s, e)
    raise BeaconError("retry-exhausted", "key norms never fell under the bound")


def pke_encrypt(a_mat: np.ndarray, pk_b: np.ndarray, m: int, params: SystemParams, rng: Rng,
                randomness: tuple[np.ndarray, int] | None = None):
    """Encrypt m and return (ciphertext, (r, e)); ``randomness`` overrides sampling."""
    if not 0 <= m < params.p:
        raise BeaconError("message-out-of-range", f"m={m} not in [0, {params.p})")
    if randomness is None:
        bound = math.sqrt(params.u) * params.r_enc
        for _ in range(ENCRYPT_RETRIES):
            r = sample_gaussian(params.r_enc, params.u, rng)
            if norm_l2(r) <= bound:
                break
        else:
            raise BeaconError("retry-exhausted", "encryption randomness never met its norm bound")
        e = int(sample_gaussian(params.sigma_noise, 1, rng)[0])
    else:
        r, e = np.asarray(randomness[0], dtype=np.int64), int(randomness[1])
    c1 = mat_mul_mod(a_mat, r, params.q)
    c2 = (int(mat_mul_mod(pk_b[None, :], r, params.q)[0]) + e + params.p * m) % params.q
    return Ciphertext(c1, c2), (r, e)


def split_residue(d: int, p: int) -> DecryptionWitness:
    """Write d = f + p*m with f centred mod p."""
    f = centered_rep(d % p, p)
    return DecryptionWitness(((d - f) // p) % p, f)


def pke_decrypt(a_mat: np.ndarray, pk_b: np.ndarray, sk_s: np.ndarray, ct: Ciphertext,
                params: SystemParams) -> DecryptionWitness:
    d = (ct.c2 - int(mat_mul_mod(sk_s[None, :], ct.c1, params.q)[0])) % params.q
    return split_residue(d, params.p)
