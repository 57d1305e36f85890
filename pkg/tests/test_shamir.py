import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from latbeacon.core import Rng
from latbeacon.errors import BeaconError
from latbeacon.shamir import (eval_poly, is_valid_share_vector, lagrange_coeffs, parity_matrix, sss_combine,
                              sss_share)


def brute_interpolate_zero(points: dict, t: int, p: int) -> set[int]:
    """f(0) for every degree-<=t polynomial through the points, by enumeration."""
    out = set()
    for coeffs in itertools.product(range(p), repeat=t + 1):
        if all(sum(c * pow(x, k, p) for k, c in enumerate(coeffs)) % p == y for x, y in points.items()):
            out.add(coeffs[0])
    return out


@pytest.mark.parametrize("p,n,t", [(7, 4, 1), (11, 5, 2), (5, 4, 1)])
def test_combine_matches_enumeration(p, n, t):
    rng = Rng.from_int(p * 100 + n)
    for _ in range(5):
        s = rng.randbelow(p)
        shares, _ = sss_share(s, n, t, p, rng)
        for subset in itertools.combinations(range(1, n + 1), t + 1):
            pts = {i: shares[i] for i in subset}
            assert brute_interpolate_zero(pts, t, p) == {s}
            assert sss_combine(subset, shares, p) == s


@given(st.sampled_from([7, 31, 257, 65537]), st.integers(1, 6), st.data())
def test_any_qualified_subset_recovers_secret(p, n, data):
    t = data.draw(st.integers(0, n - 1))
    s = data.draw(st.integers(0, p - 1))
    shares, coeffs = sss_share(s, n, t, p, Rng.from_int(data.draw(st.integers(0, 10**6))))
    assert coeffs[0] == s and len(coeffs) == t + 1
    subset = data.draw(st.lists(st.integers(1, n), min_size=t + 1, max_size=n, unique=True))
    assert sss_combine(subset, shares, p) == s


@given(st.lists(st.integers(1, 100), min_size=1, max_size=6, unique=True))
def test_lagrange_coeffs_sum_to_one(idx):
    # interpolating the constant polynomial 1 gives 1
    assert sum(lagrange_coeffs(idx, 101).values()) % 101 == 1


def test_lagrange_errors():
    with pytest.raises(BeaconError):
        lagrange_coeffs([], 7)
    with pytest.raises(BeaconError):
        lagrange_coeffs([1, 1], 7)
    with pytest.raises(BeaconError):
        lagrange_coeffs([7, 1], 7)


def test_eval_poly_horner():
    assert eval_poly([1, 2, 3], 2, 100) == 1 + 4 + 12


def test_share_preconditions():
    with pytest.raises(BeaconError):
        sss_share(1, 3, 3, 7, Rng.from_int(0))
    with pytest.raises(BeaconError):
        sss_share(1, 7, 1, 7, Rng.from_int(0))


def test_parity_exhaustive_p7():
    p, n, t = 7, 4, 1
    h = parity_matrix(n, t, p)
    assert h.shape == (4, 2)
    codewords = {tuple(eval_poly([a, b], i, p) for i in range(1, n + 1)) for a in range(p) for b in range(p)}
    assert len(codewords) == 49
    for vec in itertools.product(range(p), repeat=n):
        assert is_valid_share_vector(list(vec), h, p) == (vec in codewords)


@given(st.sampled_from([11, 31, 257]), st.integers(3, 8), st.data())
def test_parity_accepts_codewords_rejects_bumps(p, n, data):
    t = data.draw(st.integers(0, n - 2))
    h = parity_matrix(n, t, p)
    shares, _ = sss_share(data.draw(st.integers(0, p - 1)), n, t, p, Rng.from_int(data.draw(st.integers(0, 999))))
    assert is_valid_share_vector(shares, h, p)
    k = data.draw(st.integers(1, n))
    shares[k] = (shares[k] + data.draw(st.integers(1, p - 1))) % p
    # a single-coordinate change leaves the code since its minimum distance is n - t >= 2
    assert not is_valid_share_vector(shares, h, p)


def test_parity_degenerate_and_mismatch():
    with pytest.raises(BeaconError):
        parity_matrix(3, 2, 7)
    with pytest.raises(BeaconError):
        is_valid_share_vector([1, 2, 3], parity_matrix(4, 1, 7), 7)


def test_parity_column_values_are_frozen():
    # v_i = prod_{j != i} (i - j)^{-1} times i^k; recomputed by hand for p=7, n=4
    assert parity_matrix(4, 1, 7).tolist() == [[1, 1], [4, 1], [3, 2], [6, 3]]
    assert np.all(parity_matrix(4, 1, 7) < 7)
