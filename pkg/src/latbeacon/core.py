"""Modular arithmetic, discrete Gaussians and seeded randomness."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import BeaconError

TAIL_SIGMAS = 12
# Above this support size the inverse CDF is evaluated in closed form.
_TABLE_LIMIT = 1 << 20


def tail_cut_for(sigma: float) -> int:
    # round() guards against alpha*q landing a hair above an integer
    return max(1, math.ceil(round(TAIL_SIGMAS * sigma, 9)))


def _label_bytes(label) -> bytes:
    if isinstance(label, bytes):
        raw = label
    elif isinstance(label, str):
        raw = label.encode()
    elif isinstance(label, int):
        raw = label.to_bytes(8, "little", signed=True)
    else:
        raise TypeError(f"unsupported rng label {label!r}")
    return len(raw).to_bytes(4, "little") + raw


class Rng:
    """Counter-mode SHAKE-256 stream.

    Every request consumes one counter value, so the output is a pure
    function of (seed, counter, request sizes).
    """

    def __init__(self, seed: bytes, counter: int = 0):
        if len(seed) != 32:
            raise BeaconError("invalid-params", "rng seed must be 32 bytes")
        self.seed = bytes(seed)
        self.counter = counter

    @classmethod
    def from_int(cls, value: int) -> Rng:
        return cls(hashlib.sha256(b"latbeacon/seed" + value.to_bytes(16, "little")).digest())

    @staticmethod
    def derive_seed(master: bytes, *labels) -> bytes:
        h = hashlib.sha256(b"latbeacon/derive")
        h.update(master)
        for label in labels:
            h.update(_label_bytes(label))
        return h.digest()

    def child(self, *labels) -> Rng:
        """Independent stream keyed by this seed and the labels (counter untouched)."""
        return Rng(self.derive_seed(self.seed, *labels))

    def bytes(self, n: int) -> bytes:
        out = hashlib.shake_256(self.seed + self.counter.to_bytes(8, "little")).digest(n)
        self.counter += 1
        return out

    def uint64(self, size: int) -> np.ndarray:
        return np.frombuffer(self.bytes(8 * size), dtype="<u8").copy()

    def floats(self, size: int) -> np.ndarray:
        """Uniform doubles in [0, 1) with 53 random bits each."""
        return (self.uint64(size) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def uniform_mod(self, m: int, size: int) -> np.ndarray:
        """Exactly uniform integers in [0, m) by rejection on 64-bit words."""
        if m < 1:
            raise BeaconError("invalid-params", "modulus must be positive")
        limit = (1 << 64) - ((1 << 64) % m)
        out = np.empty(0, dtype=np.int64)
        while out.size < size:
            need = size - out.size
            words = self.uint64(need + 8)
            if limit < (1 << 64):
                words = words[words < np.uint64(limit)]
            out = np.concatenate([out, (words % np.uint64(m)).astype(np.int64)[:need]])
        return out

    def randbelow(self, m: int) -> int:
        return int(self.uniform_mod(m, 1)[0])


@dataclass(frozen=True)
class GaussianParams:
    sigma: float
    dim: int
    tail_cut: int = 0

    def __post_init__(self):
        if not self.sigma > 0:
            raise BeaconError("invalid-params", "sigma must be positive")
        if self.dim <= 0:
            raise BeaconError("invalid-params", "dim must be positive")
        if self.tail_cut == 0:
            object.__setattr__(self, "tail_cut", tail_cut_for(self.sigma))
        if self.tail_cut < math.ceil(self.sigma):
            raise BeaconError("invalid-params", "tail_cut below sigma")


@lru_cache(maxsize=64)
def gaussian_table(sigma: float, tail_cut: int) -> tuple[np.ndarray, np.ndarray]:
    """Support and normalised pmf of the truncated 1-D discrete Gaussian."""
    xs = np.arange(-tail_cut, tail_cut + 1, dtype=np.int64)
    weights = np.exp(-math.pi * (xs.astype(np.float64) / sigma) ** 2)
    return xs, weights / weights.sum()


@lru_cache(maxsize=64)
def _cdt(sigma: float, tail_cut: int) -> np.ndarray:
    _, pmf = gaussian_table(sigma, tail_cut)
    cdf = np.cumsum(pmf)
    cdf[-1] = 1.0
    return cdf


def sample_gaussian(sigma: float, size, rng: Rng, tail_cut: int | None = None) -> np.ndarray:
    """Inverse-CDT draws from D_{Z,sigma} truncated to [-tail_cut, tail_cut]."""
    tc = tail_cut_for(sigma) if tail_cut is None else tail_cut
    count = int(np.prod(size))
    u = rng.floats(count)
    if 2 * tc + 1 <= _TABLE_LIMIT:
        idx = np.searchsorted(_cdt(sigma, tc), u, side="right")
        x = np.minimum(idx, 2 * tc) - tc
    else:
        # For wide Gaussians the cumulative mass up to x equals the normal
        # cdf at x + 1/2 to far below double precision.
        s = sigma / math.sqrt(2 * math.pi)
        lo, hi = ndtr((-tc - 0.5) / s), ndtr((tc + 0.5) / s)
        x = np.ceil(s * ndtri(lo + u * (hi - lo)) - 0.5)
        x = np.clip(x, -tc, tc)
    return x.astype(np.int64).reshape(size)


def gauss_sample(gp: GaussianParams, rng: Rng) -> np.ndarray:
    return sample_gaussian(gp.sigma, gp.dim, rng, gp.tail_cut)


def mat_mul_mod(a: np.ndarray, x: np.ndarray, q: int) -> np.ndarray:
    """Exact ``a @ x mod q`` for integer arrays, avoiding int64 overflow."""
    a = np.asarray(a, dtype=np.int64) % q
    x = np.asarray(x, dtype=np.int64) % q
    inner = a.shape[-1]
    if a.shape[-1] != x.shape[0]:
        raise BeaconError("dimension-mismatch", f"{a.shape} @ {x.shape}")
    if inner == 0:
        return np.zeros(a.shape[:-1] + x.shape[1:], dtype=np.int64)
    if (q - 1) ** 2 * inner < 2**53:
        # float64 products and sums are exact in this range and hit BLAS
        prod = a.astype(np.float64) @ x.astype(np.float64)
        return (prod.astype(np.int64)) % q
    qbits = (q - 1).bit_length()
    limb = 61 - qbits - inner.bit_length()
    if limb >= qbits:
        return (a @ x) % q
    if limb < 1:
        raise BeaconError("invalid-params", "modulus too large for exact product")
    acc = np.zeros(a.shape[:-1] + x.shape[1:], dtype=np.int64)
    mask = (1 << limb) - 1
    for shift in range(((qbits + limb - 1) // limb - 1) * limb, -1, -limb):
        part = (x >> shift) & mask
        acc = (acc * (1 << limb) + a @ part) % q
    return acc


def mat_vec_mul(a: np.ndarray, x: np.ndarray, q: int) -> np.ndarray:
    a = np.asarray(a)
    x = np.asarray(x)
    if a.ndim != 2 or x.ndim != 1 or a.shape[1] != x.shape[0]:
        raise BeaconError("dimension-mismatch", f"{a.shape} @ {x.shape}")
    return mat_mul_mod(a, x, q)


def norm_l2(x) -> float:
    arr = np.asarray(x, dtype=np.int64)
    if arr.size and int(np.abs(arr).max()) >= 1 << 26:
        return math.sqrt(sum(int(v) * int(v) for v in arr.ravel()))
    return math.sqrt(int(np.dot(arr.ravel(), arr.ravel())))


def row_norms(mat) -> np.ndarray:
    """Euclidean norm of every row of an integer matrix."""
    mat = np.asarray(mat, dtype=np.int64)
    if mat.size == 0:
        return np.zeros(mat.shape[0])
    top = int(np.abs(mat).max())
    if top < 1 << 26 and mat.shape[1] < 1 << 10:
        return np.sqrt(np.einsum("ij,ij->i", mat, mat).astype(np.float64))
    return np.array([norm_l2(row) for row in mat])


def centered_rep(x: int, m: int) -> int:
    r = x % m
    half = (m - 1) // 2 if m % 2 else m // 2 - 1
    return r - m if r > half else r


def centered(arr, m: int) -> np.ndarray:
    r = np.asarray(arr, dtype=np.int64) % m
    half = (m - 1) // 2 if m % 2 else m // 2 - 1
    return np.where(r > half, r - m, r)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    return all(n % d for d in range(3, math.isqrt(n) + 1, 2))


def int_width(q: int) -> int:
    """Bytes needed for an integer in [0, q)."""
    return max(1, ((q - 1).bit_length() + 7) // 8)
