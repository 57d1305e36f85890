import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from latbeacon.core import Rng, mat_mul_mod
from latbeacon.errors import BeaconError
from latbeacon.params import get_params, validate_params
from latbeacon.pke import pke_decrypt, pke_encrypt, pke_keygen, pke_setup, split_residue


@pytest.fixture(scope="module", params=["toy", "p31", "toy64"])
def setup(request):
    params = get_params(request.param)
    rng = Rng.from_int(42)
    a = pke_setup(params, rng.child("A"))
    kp = pke_keygen(a, params, rng.child("key"))
    return params, a, kp


def test_key_relation(setup):
    params, a, kp = setup
    assert a.shape == (params.v, params.u)
    # b = s A + e mod q, recomputed with Python ints
    for col in range(params.u):
        acc = sum(int(kp.sk_s[r]) * int(a[r, col]) for r in range(params.v)) + int(kp.noise_e[col])
        assert acc % params.q == kp.pk_b[col]


def test_round_trip_and_noise_within_budget(setup):
    params, a, kp = setup
    rng = Rng.from_int(7)
    bound = validate_params(params).bound
    for k in range(200):
        m = rng.randbelow(params.p)
        ct, (r, e) = pke_encrypt(a, kp.pk_b, m, params, rng)
        dec = pke_decrypt(a, kp.pk_b, kp.sk_s, ct, params)
        assert dec.message == m
        # recovered noise is exactly <e_key, r> + e
        noise = int(np.dot(kp.noise_e, r)) + e
        assert dec.f == noise
        assert abs(noise) <= bound


def test_explicit_randomness_gives_known_ciphertext(setup):
    params, a, kp = setup
    r = np.arange(params.u) % 3 - 1
    ct, _ = pke_encrypt(a, kp.pk_b, 5, params, Rng.from_int(0), randomness=(r, 2))
    assert np.array_equal(ct.c1, mat_mul_mod(a, r, params.q))
    expect = (sum(int(b) * int(x) for b, x in zip(kp.pk_b, r)) + 2 + params.p * 5) % params.q
    assert ct.c2 == expect


@given(st.integers(-(257**2), 257**2))
def test_split_residue(d):
    w = split_residue(d, 257)
    assert 0 <= w.message < 257
    assert -128 <= w.f <= 128
    assert (w.f + 257 * w.message - d) % 257**2 == 0


def test_message_range_enforced(setup):
    params, a, kp = setup
    with pytest.raises(BeaconError):
        pke_encrypt(a, kp.pk_b, params.p, params, Rng.from_int(0))
    with pytest.raises(BeaconError):
        pke_encrypt(a, kp.pk_b, -1, params, Rng.from_int(0))


def test_keygen_dimension_check(setup):
    params, a, _ = setup
    with pytest.raises(BeaconError):
        pke_keygen(a[:, :1], params, Rng.from_int(0))


def test_keys_respect_norm_bounds(setup):
    params, a, kp = setup
    sigma = params.sigma_key
    assert np.linalg.norm(kp.sk_s) < np.sqrt(params.v) * sigma
    assert np.linalg.norm(kp.noise_e) < np.sqrt(params.u) * sigma
