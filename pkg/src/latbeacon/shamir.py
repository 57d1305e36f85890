"""Shamir sharing over Z_p with evaluation points 1..n and its dual-code parity check."""

from __future__ import annotations

import numpy as np

from .core import Rng
from .errors import BeaconError


def _check_field(n: int, p: int) -> None:
    if n >= p:
        raise BeaconError("field-too-small", f"need n < p, got n={n} p={p}")


def eval_poly(coeffs, x: int, p: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + int(c)) % p
    return acc


def sss_share(s: int, n: int, t: int, p: int, rng: Rng | None = None, coeffs=None):
    """Shares {i: f(i)} of a degree-t polynomial f with f(0) = s, plus f itself."""
    if t >= n:
        raise BeaconError("threshold-too-large", f"t={t} must be below n={n}")
    _check_field(n, p)
    if coeffs is None:
        coeffs = [s % p] + [int(c) for c in rng.uniform_mod(p, t)]
    coeffs = [int(c) % p for c in coeffs]
    return {i: eval_poly(coeffs, i, p) for i in range(1, n + 1)}, coeffs


def lagrange_coeffs(indices, p: int) -> dict[int, int]:
    idx = list(indices)
    if not idx:
        raise BeaconError("empty-set", "need at least one index")
    if len(set(idx)) != len(idx):
        raise BeaconError("duplicate-index", str(idx))
    if any(i % p == 0 for i in idx):
        raise BeaconError("index-zero", str(idx))
    out = {}
    for i in idx:
        num, den = 1, 1
        for j in idx:
            if j != i:
                num = num * j % p
                den = den * (j - i) % p
        out[i] = num * pow(den, -1, p) % p
    return out


def sss_combine(indices, shares, p: int) -> int:
    lam = lagrange_coeffs(indices, p)
    return sum(lam[i] * shares[i] for i in lam) % p


def parity_matrix(n: int, t: int, p: int) -> np.ndarray:
    """n x (n-t-1) matrix H with m^T H = 0 exactly for degree-<=t evaluation vectors."""
    cols = n - t - 1
    if cols <= 0:
        raise BeaconError("degenerate-dims", f"n-t-1 = {cols}")
    _check_field(n, p)
    h = np.zeros((n, cols), dtype=np.int64)
    for i in range(1, n + 1):
        den = 1
        for j in range(1, n + 1):
            if j != i:
                den = den * (i - j) % p
        vi = pow(den, -1, p)
        for k in range(cols):
            h[i - 1, k] = vi * pow(i, k, p) % p
    return h


def is_valid_share_vector(m, h: np.ndarray, p: int) -> bool:
    vec = np.asarray([m[i] for i in sorted(m)] if isinstance(m, dict) else m, dtype=np.int64)
    if vec.shape[0] != h.shape[0]:
        raise BeaconError("dimension-mismatch", f"{vec.shape[0]} shares vs {h.shape[0]} rows")
    return not np.any((vec % p) @ h % p)
