import hashlib
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from latbeacon.core import (Rng, centered, centered_rep, int_width, is_prime, mat_mul_mod, norm_l2, row_norms,
                            sample_gaussian, tail_cut_for)
from latbeacon.errors import BeaconError


def test_rng_stream_matches_hashlib():
    seed = bytes(range(32))
    r = Rng(seed)
    assert r.bytes(16) == hashlib.shake_256(seed + (0).to_bytes(8, "little")).digest(16)
    assert r.bytes(5) == hashlib.shake_256(seed + (1).to_bytes(8, "little")).digest(5)


def test_rng_from_int_is_hash_of_the_value():
    expect = hashlib.sha256(b"latbeacon/seed" + (7).to_bytes(16, "little")).digest()
    assert Rng.from_int(7).seed == expect


def test_child_streams_are_deterministic_and_distinct():
    a = Rng.from_int(1)
    assert a.child("x", 1).seed == Rng.from_int(1).child("x", 1).seed
    assert a.child("x", 1).seed != a.child("x", 2).seed
    # label framing: ("ab",) and ("a", "b") must not collide
    assert a.child("ab").seed != a.child("a", "b").seed
    # children do not advance the parent
    assert a.counter == 0


def test_rng_rejects_bad_seed():
    with pytest.raises(BeaconError):
        Rng(b"short")


@given(st.integers(1, 10**12), st.integers(0, 2**32))
def test_uniform_mod_in_range(m, k):
    out = Rng.from_int(k).uniform_mod(m, 50)
    assert out.shape == (50,)
    assert out.min() >= 0 and out.max() < m


def test_uniform_mod_is_flat():
    out = Rng.from_int(3).uniform_mod(17, 17 * 400)
    assert stats.chisquare(np.bincount(out, minlength=17)).pvalue > 1e-4


@pytest.mark.parametrize("sigma", [0.5, 2.0, 8.0, 40.0])
def test_gaussian_matches_exact_pmf(sigma):
    tc = tail_cut_for(sigma)
    xs = np.arange(-tc, tc + 1)
    rho = np.array([math.exp(-math.pi * x * x / sigma**2) for x in xs])
    pmf = rho / rho.sum()
    draws = sample_gaussian(sigma, 40000, Rng.from_int(11))
    assert np.abs(draws).max() <= tc
    # pool the sparse tails so every expected count is at least 5
    counts = np.bincount(draws + tc, minlength=xs.size).astype(float)
    expected = pmf * draws.size
    keep = expected >= 5
    obs = np.append(counts[keep], counts[~keep].sum())
    exp = np.append(expected[keep], expected[~keep].sum())
    if exp[-1] == 0:
        obs, exp = obs[:-1], exp[:-1]
    assert stats.chisquare(obs, exp * obs.sum() / exp.sum()).pvalue > 1e-4


def test_wide_gaussian_closed_form_branch():
    sigma = 2.0e5  # support larger than the table limit
    draws = sample_gaussian(sigma, 20000, Rng.from_int(5))
    sd = sigma / math.sqrt(2 * math.pi)
    assert abs(draws.mean()) < 5 * sd / math.sqrt(draws.size)
    assert abs(draws.std() / sd - 1) < 0.03


def test_gaussian_is_deterministic():
    a = sample_gaussian(3.0, (4, 5), Rng.from_int(9))
    b = sample_gaussian(3.0, (4, 5), Rng.from_int(9))
    assert a.shape == (4, 5) and np.array_equal(a, b)


@given(st.integers(2, 2**40), st.integers(1, 6), st.integers(1, 6), st.integers(0, 1000))
def test_mat_mul_mod_matches_python_ints(q, rows, inner, k):
    r = Rng.from_int(k)
    a = r.uniform_mod(q, rows * inner).reshape(rows, inner)
    x = r.uniform_mod(q, inner)
    expect = [sum(int(a[i, j]) * int(x[j]) for j in range(inner)) % q for i in range(rows)]
    assert mat_mul_mod(a, x, q).tolist() == expect


def test_mat_mul_mod_negative_inputs():
    a = np.array([[-1, 2], [3, -4]])
    x = np.array([-5, 6])
    assert mat_mul_mod(a, x, 7).tolist() == [(5 + 12) % 7, (-15 - 24) % 7]


def test_mat_mul_mod_dimension_mismatch():
    with pytest.raises(BeaconError):
        mat_mul_mod(np.zeros((2, 3)), np.zeros(4), 5)


@given(st.lists(st.integers(-2**40, 2**40), max_size=20))
def test_norm_l2(xs):
    assert norm_l2(xs) == pytest.approx(math.sqrt(sum(x * x for x in xs)))


def test_row_norms():
    m = np.array([[3, 4], [0, 0], [-5, 12]])
    assert row_norms(m).tolist() == [5.0, 0.0, 13.0]


@given(st.integers(-10**9, 10**9), st.integers(2, 10**6))
def test_centered_rep(x, m):
    r = centered_rep(x, m)
    assert (r - x) % m == 0
    assert (-m / 2 <= r < m / 2) if m % 2 == 0 else (-m / 2 < r < m / 2)
    assert centered(np.array([x]), m)[0] == r


def test_centered_rep_even_modulus_half_maps_down():
    assert centered_rep(2, 4) == -2


@pytest.mark.parametrize("n", range(0, 200))
def test_is_prime(n):
    assert is_prime(n) == (n > 1 and all(n % d for d in range(2, n)))


@pytest.mark.parametrize("q,width", [(2, 1), (256, 1), (257, 2), (961, 2), (65536, 2), (66049, 3), (2**24 + 1, 4)])
def test_int_width(q, width):
    assert int_width(q) == width
