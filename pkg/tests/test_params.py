import math

import pytest

from latbeacon.errors import BeaconError
from latbeacon.params import (get_params, load_param_sets, make_params, parse_param_config, validate_params)

SHIPPED = ("toy", "toy64", "small", "p31")


def test_shipped_sets_present():
    assert set(load_param_sets()) == set(SHIPPED)


@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_sets_are_consistent(name):
    params = get_params(name)
    params.check()
    assert params.q == params.p**2
    # beta from sqrt(u) * ln(u) * (alpha + 1/(2q)), recomputed here
    assert params.beta == pytest.approx(math.sqrt(params.u) * math.log(params.u) * (params.alpha + 0.5 / params.q))
    assert validate_params(params).ok


def test_toy_modulus_and_width():
    toy = get_params("toy")
    assert (toy.p, toy.q, toy.width) == (257, 66049, 3)


def test_noise_bound_recomputed_by_hand():
    toy = get_params("toy")
    rep = validate_params(toy)
    # sqrt(u)*alpha*q * sqrt(u)*r_enc + ceil(12 * beta*q)
    key = math.sqrt(toy.u) * toy.alpha * toy.q * math.sqrt(toy.u) * toy.r_enc
    assert rep.key_term == pytest.approx(key)
    assert rep.enc_term == math.ceil(12 * toy.beta * toy.q)
    assert rep.bound == pytest.approx(key + rep.enc_term)
    assert rep.limit == toy.p / 2
    assert 0 < rep.margin < 1


def test_with_nt_keeps_everything_else():
    toy = get_params("toy")
    p7 = toy.with_nt(7, 3)
    assert (p7.n, p7.t, p7.q, p7.u) == (7, 3, toy.q, toy.u)


@pytest.mark.parametrize("kw", [
    dict(p=256, u=4, v=4, alpha_q=2, r_enc=2),  # p not prime
    dict(p=257, u=4, v=4, alpha_q=2, r_enc=2, q=1000),  # q != p^2
    dict(p=257, u=4, v=4, alpha_q=2, r_enc=2, n=4, t=2),  # t >= n/2
    dict(p=5, u=4, v=4, alpha_q=2, r_enc=2, n=5, t=1),  # n >= p
])
def test_check_rejects(kw):
    with pytest.raises(BeaconError):
        make_params(**kw).check()


def test_oversized_noise_fails_validation():
    bad = make_params(p=257, u=64, v=64, alpha_q=8, r_enc=8)
    rep = validate_params(bad)
    assert not rep.ok and "FAIL" in rep.summary()


def test_beta_mismatch_flagged():
    params = make_params(p=257, u=4, v=4, alpha_q=2, r_enc=2, beta=1e-4)
    rep = validate_params(params)
    assert not rep.beta_ok and not rep.ok


def test_get_params_refuses_invalid_unless_allowed(tmp_path):
    conf = tmp_path / "p.conf"
    conf.write_text("[big]\np = 257\nu = 64\nv = 64\nalpha_q = 8\nr_enc = 8\n")
    with pytest.raises(BeaconError, match="invalid-params"):
        get_params("big", path=conf)
    assert get_params("big", path=conf, allow_invalid=True).u == 64


@pytest.mark.parametrize("text", [
    "[x]\np = 257\nu = 4\n",  # missing keys
    "[x]\np = 257\nu = 4\nv = 4\nalpha_q = 2\nr_enc = 2\nbogus = 1\n",
    "[x]\np = abc\nu = 4\nv = 4\nalpha_q = 2\nr_enc = 2\n",
])
def test_parse_errors(text):
    with pytest.raises(BeaconError):
        parse_param_config(text)


def test_unknown_set():
    with pytest.raises(BeaconError):
        get_params("nope")
