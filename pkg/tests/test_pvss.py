import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latbeacon.core import Rng
from latbeacon.encoding import Reader, Writer
from latbeacon.errors import BeaconError
from latbeacon.games import (CHEATS, CheatBench, ciphertext_smoke_test, correctness_game, run_cheat)
from latbeacon.params import get_params
from latbeacon.pke import Ciphertext
from latbeacon.pvss import (DecryptionShare, KeyAnnouncement, SharingTranscript, pvss_combine, pvss_dec,
                            pvss_decver, pvss_keygen, pvss_keyver, pvss_setup, pvss_share, pvss_sharever,
                            share_parity)


@pytest.fixture(scope="module")
def keyed(toy_pp):
    pairs = [pvss_keygen(toy_pp, Rng.from_int(50 + i), b"k%d" % i) for i in range(4)]
    return toy_pp, [ka for ka, _ in pairs], [kp for _, kp in pairs]


def test_setup_is_a_function_of_the_seed(toy):
    a = pvss_setup(toy, bytes(32))
    b = pvss_setup(toy, bytes(32))
    c = pvss_setup(toy, bytes([1]) + bytes(31))
    assert np.array_equal(a.a_mat, b.a_mat) and a.crs1 == b.crs1
    assert not np.array_equal(a.a_mat, c.a_mat)
    assert a.report.ok


def test_setup_refuses_invalid(toy):
    from dataclasses import replace
    with pytest.raises(BeaconError):
        pvss_setup(replace(toy, u=64, v=64), bytes(32))


def test_key_announcements_verify_under_their_context(keyed):
    pp, anns, _ = keyed
    for i, ka in enumerate(anns):
        assert pvss_keyver(pp, ka, b"k%d" % i)
        assert not pvss_keyver(pp, ka, b"k%d" % (i + 1))
    assert not pvss_keyver(pp, KeyAnnouncement(anns[0].pk_b, None), b"k0")
    assert not pvss_keyver(pp, KeyAnnouncement(anns[0].pk_b[:-1], anns[0].proof0), b"k0")


def test_full_pvss_flow(keyed):
    pp, anns, keys = keyed
    pks = [ka.pk_b for ka in anns]
    rng = Rng.from_int(9)
    tr = pvss_share(pp, pks, 123, 4, 1, rng, dealer=2, context=b"c")
    assert tr.dealer == 2
    assert pvss_sharever(pp, pks, 4, 1, tr, b"c")
    assert not pvss_sharever(pp, pks, 4, 1, tr, b"d")
    assert not pvss_sharever(pp, pks[::-1], 4, 1, tr, b"c")
    shares = {}
    for j in range(4):
        ds = pvss_dec(pp, keys[j], tr.ciphertexts[j], rng, holder=j + 1, context=b"x")
        assert pvss_decver(pp, pks[j], tr.ciphertexts[j], ds, b"x")
        assert not pvss_decver(pp, pks[j], tr.ciphertexts[j], ds, b"y")
        shares[j + 1] = ds.share
    for subset in itertools.combinations(range(1, 5), 2):
        assert pvss_combine(pp, subset, shares) == 123
    assert pvss_combine(pp, [3], shares) is None


def test_combine_uses_lowest_indices(toy_pp):
    # shares 1, 2 lie on f(x) = 5 + x; share 3 is junk and must be ignored
    shares = {1: 6, 2: 7, 3: 200}
    assert pvss_combine(toy_pp, [3, 2, 1], shares, t=1) == 5


def test_share_preconditions(keyed):
    pp, anns, _ = keyed
    pks = [ka.pk_b for ka in anns]
    with pytest.raises(BeaconError):
        pvss_share(pp, pks, pp.params.p, 4, 1, Rng.from_int(0))
    with pytest.raises(BeaconError):
        pvss_share(pp, pks[:3], 1, 4, 1, Rng.from_int(0))


def test_sharever_rejects_malformed(keyed):
    pp, anns, _ = keyed
    pks = [ka.pk_b for ka in anns]
    tr = pvss_share(pp, pks, 1, 4, 1, Rng.from_int(1))
    assert not pvss_sharever(pp, pks, 4, 2, tr)  # the threshold is part of the statement
    assert not pvss_sharever(pp, pks, 4, 4, tr)
    big = Ciphertext(tr.ciphertexts[0].c1, pp.params.q)
    assert not pvss_sharever(pp, pks, 4, 1, SharingTranscript(0, (big,) + tr.ciphertexts[1:], tr.proof1))
    assert not pvss_sharever(pp, pks, 4, 1, SharingTranscript(0, tr.ciphertexts[:3], tr.proof1))
    assert not pvss_sharever(pp, pks, 4, 1, "junk")


def test_decver_rejects_out_of_range_share(keyed):
    pp, anns, keys = keyed
    tr = pvss_share(pp, [ka.pk_b for ka in anns], 1, 4, 1, Rng.from_int(2))
    ds = pvss_dec(pp, keys[0], tr.ciphertexts[0], Rng.from_int(3))
    assert not pvss_decver(pp, anns[0].pk_b, tr.ciphertexts[0], DecryptionShare(1, pp.params.p, ds.proof2))
    assert not pvss_decver(pp, anns[0].pk_b, tr.ciphertexts[0], DecryptionShare(1, -1, ds.proof2))


def test_share_parity_degenerate_shape():
    assert share_parity(2, 1, 7).shape == (2, 0)
    assert share_parity(4, 1, 7).shape == (4, 2)


def test_wire_round_trips(keyed):
    pp, anns, keys = keyed
    w = pp.params.width
    tr = pvss_share(pp, [ka.pk_b for ka in anns], 7, 4, 1, Rng.from_int(4), dealer=3)
    ds = pvss_dec(pp, keys[1], tr.ciphertexts[1], Rng.from_int(5), holder=2)
    for obj, cls in ((anns[0], KeyAnnouncement), (tr, SharingTranscript), (ds, DecryptionShare),
                     (KeyAnnouncement(anns[0].pk_b, None), KeyAnnouncement)):
        data = obj.write(Writer(w)).getvalue()
        back = cls.read(Reader(data, w))
        assert back.write(Writer(w)).getvalue() == data


@settings(max_examples=10)
@given(st.sampled_from([(3, 1), (4, 1), (5, 2), (2, 0)]), st.integers(0, 256), st.integers(0, 10**6))
def test_share_then_reconstruct_property(toy_pp, nt, s, seed):
    n, t = nt
    rng = Rng.from_int(seed)
    pairs = [pvss_keygen(toy_pp, rng.child("k", i)) for i in range(n)]
    pks = [ka.pk_b for ka, _ in pairs]
    tr = pvss_share(toy_pp, pks, s, n, t, rng)
    assert pvss_sharever(toy_pp, pks, n, t, tr)
    shares = {j + 1: pvss_dec(toy_pp, kp, tr.ciphertexts[j], rng).share for j, (_, kp) in enumerate(pairs)}
    assert pvss_combine(toy_pp, list(shares), shares, t) == s


@pytest.mark.parametrize("n,t", [(4, 1), (5, 2)])
def test_correctness_game_smoke(toy_pp, n, t):
    for k in range(3):
        r = Rng.from_int(k)
        corrupted = [1 + r.randbelow(n)][:t]
        assert correctness_game(toy_pp, n, t, corrupted, r) == 1


def test_correctness_game_refuses_majority(toy_pp):
    assert correctness_game(toy_pp, 4, 1, [1, 2], Rng.from_int(0)) == 0


@pytest.mark.parametrize("name", sorted(CHEATS))
def test_each_cheat_rejected_smoke(toy_pp, name):
    bench = CheatBench(toy_pp, 4, 1, Rng.from_int(1))
    rejected, wins = run_cheat(name, bench, 5, Rng.from_int(2))
    assert (rejected, wins) == (5, 0)


def test_ciphertext_smoke_test_sees_no_difference():
    pp = pvss_setup(get_params("toy64"), Rng.from_int(5).seed)
    assert ciphertext_smoke_test(pp, 0, pp.params.p - 1, 1000, Rng.from_int(3)) > 1e-3


def test_ciphertext_smoke_test_flags_tiny_dimension(toy_pp):
    # u = 4 leaves too little encryption entropy to hide a shift by p * m
    assert ciphertext_smoke_test(toy_pp, 0, toy_pp.params.p - 1, 2000, Rng.from_int(0)) < 1e-3
