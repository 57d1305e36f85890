"""Uniformity checks on beacon outputs over Z_p."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import BeaconError

MIN_SAMPLES = 100


@dataclass(frozen=True)
class TestResult:
    name: str
    statistic: float
    dof: int
    pvalue: float

    def line(self) -> str:
        return f"{self.name}\tstat={self.statistic:.4f}\tdof={self.dof}\tp={self.pvalue:.6g}"


def _check(values, p: int) -> np.ndarray:
    arr = np.asarray(values, dtype=np.int64)
    if arr.size < MIN_SAMPLES:
        raise BeaconError("too-few-samples", f"{arr.size} < {MIN_SAMPLES}")
    if arr.min() < 0 or arr.max() >= p:
        raise BeaconError("out-of-range", "values must lie in [0, p)")
    return arr


def chi_square_uniform(values, p: int) -> TestResult:
    arr = _check(values, p)
    counts = np.bincount(arr, minlength=p)
    res = stats.chisquare(counts)
    return TestResult("chi2-uniform", float(res.statistic), p - 1, float(res.pvalue))


def _psi2(arr: np.ndarray, p: int, m: int) -> float:
    """Good's psi^2 over cyclically overlapping m-tuples."""
    n = arr.size
    codes = np.zeros(n, dtype=np.int64)
    for k in range(m):
        codes = codes * p + np.roll(arr, -k)
    cells = p**m
    counts = np.bincount(codes, minlength=cells)
    return float(cells / n * np.sum((counts - n / cells) ** 2))


def serial_test(values, p: int) -> TestResult:
    """Lag-1 pair test: psi2_2 - psi2_1 is asymptotically chi-square with p^2 - p dof."""
    arr = _check(values, p)
    stat = _psi2(arr, p, 2) - _psi2(arr, p, 1)
    dof = p * p - p
    return TestResult("serial-pairs", stat, dof, float(stats.chi2.sf(stat, dof)))


def run_all(values, p: int) -> list[TestResult]:
    return [chi_square_uniform(values, p), serial_test(values, p)]
