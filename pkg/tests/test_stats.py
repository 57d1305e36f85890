import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats as sps

from latbeacon.core import Rng
from latbeacon.errors import BeaconError
from latbeacon.stats import MIN_SAMPLES, chi_square_uniform, run_all, serial_test


def pair_statistic_oracle(xs, p):
    """Good's serial statistic from explicit dictionaries."""
    n = len(xs)
    singles, pairs = {}, {}
    for k in range(n):
        singles[xs[k]] = singles.get(xs[k], 0) + 1
        key = (xs[k], xs[(k + 1) % n])
        pairs[key] = pairs.get(key, 0) + 1
    psi1 = p / n * sum((singles.get(a, 0) - n / p) ** 2 for a in range(p))
    psi2 = p * p / n * sum((pairs.get((a, b), 0) - n / p**2) ** 2 for a in range(p) for b in range(p))
    return psi2 - psi1


def test_uniform_sample_passes():
    xs = Rng.from_int(1).uniform_mod(31, 10_000)
    for r in run_all(xs, 31):
        assert r.pvalue > 0.001


def test_constant_sequence_fails_hard():
    xs = np.full(10_000, 7)
    for r in run_all(xs, 31):
        assert r.pvalue < 1e-6


def test_alternating_sequence_caught_by_serial_only():
    xs = np.tile(np.arange(31), 40)  # perfectly flat counts, fully predictable pairs
    assert chi_square_uniform(xs, 31).pvalue > 0.99
    assert serial_test(xs, 31).pvalue < 1e-6


@given(st.lists(st.integers(0, 4), min_size=MIN_SAMPLES, max_size=300))
def test_serial_matches_oracle(xs):
    r = serial_test(xs, 5)
    assert r.statistic == pytest.approx(pair_statistic_oracle(xs, 5), abs=1e-6)
    assert r.dof == 20


def test_chi_square_matches_scipy_formula():
    xs = Rng.from_int(2).uniform_mod(13, 500)
    counts = np.bincount(xs, minlength=13)
    exp = 500 / 13
    stat = float(((counts - exp) ** 2 / exp).sum())
    r = chi_square_uniform(xs, 13)
    assert r.statistic == pytest.approx(stat)
    assert r.pvalue == pytest.approx(sps.chi2.sf(stat, 12))


def test_too_few_samples():
    with pytest.raises(BeaconError, match="too-few-samples"):
        chi_square_uniform(np.zeros(50, dtype=int), 31)


def test_out_of_range():
    with pytest.raises(BeaconError, match="out-of-range"):
        serial_test(np.full(200, 31), 31)


def test_result_line_format():
    line = chi_square_uniform(Rng.from_int(3).uniform_mod(31, 200), 31).line()
    assert line.startswith("chi2-uniform\tstat=") and "dof=30" in line
