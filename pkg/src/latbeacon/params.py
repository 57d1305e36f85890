"""System parameters, the shipped parameter sets and the noise budget check."""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from .core import int_width, is_prime, tail_cut_for
from .errors import BeaconError

BETA_RTOL = 2.0**-20
# ||r|| <= sqrt(u) * r_enc is enforced by resampling in encryption, so the
# Cauchy-Schwarz term needs no extra tail multiplier.
NORM_TAIL_FACTOR = 1.0


def beta_formula(u: int, alpha: float, q: int) -> float:
    return math.sqrt(u) * math.log(u) * (alpha + 1 / (2 * q))


@dataclass(frozen=True)
class SystemParams:
    p: int
    q: int
    u: int
    v: int
    alpha: float
    beta: float
    r_enc: float
    n: int
    t: int
    lambda_sec: int
    rep: int
    name: str = "custom"
    backend: str = "sigma-fs"

    @property
    def sigma_key(self) -> float:
        return round(self.alpha * self.q, 12)

    @property
    def sigma_noise(self) -> float:
        return round(self.beta * self.q, 12)

    @property
    def width(self) -> int:
        return int_width(self.q)

    def with_nt(self, n: int, t: int) -> SystemParams:
        return replace(self, n=n, t=t)

    def check(self) -> None:
        if not is_prime(self.p):
            raise BeaconError("invalid-params", f"p={self.p} is not prime")
        if self.q != self.p * self.p:
            raise BeaconError("invalid-params", f"q={self.q} is not p^2")
        if self.n < 1 or self.t < 0 or 2 * self.t >= self.n:
            raise BeaconError("invalid-params", f"need 0 <= t < n/2, got n={self.n} t={self.t}")
        if min(self.u, self.v, self.rep) < 1:
            raise BeaconError("invalid-params", "dimensions and rep must be positive")
        if not (self.alpha > 0 and self.beta > 0 and self.r_enc > 0):
            raise BeaconError("invalid-params", "Gaussian widths must be positive")
        if self.n >= self.p:
            raise BeaconError("invalid-params", "n must be below p")


def make_params(p: int, u: int, v: int, alpha_q: float, r_enc: float, *, n: int = 4, t: int = 1,
                rep: int = 40, lambda_sec: int = 40, q: int | None = None, beta: float | None = None,
                name: str = "custom", backend: str = "sigma-fs") -> SystemParams:
    q = p * p if q is None else q
    alpha = alpha_q / q
    if beta is None:
        beta = beta_formula(u, alpha, q)
    return SystemParams(p=p, q=q, u=u, v=v, alpha=alpha, beta=beta, r_enc=r_enc, n=n, t=t,
                        lambda_sec=lambda_sec, rep=rep, name=name, backend=backend)


@dataclass(frozen=True)
class NoiseBudgetReport:
    key_term: float
    enc_term: int
    bound: float
    limit: float
    passed: bool
    beta_expected: float
    beta_ok: bool

    @property
    def ok(self) -> bool:
        return self.passed and self.beta_ok

    @property
    def margin(self) -> float:
        return 1 - self.bound / self.limit

    def summary(self) -> str:
        verdict = "pass" if self.ok else "FAIL"
        flag = "" if self.beta_ok else " beta-formula-mismatch"
        return (f"{verdict}: noise bound {self.bound:.1f} vs p/2 = {self.limit:.1f} "
                f"(margin {100 * self.margin:.1f}%){flag}")


def validate_params(params: SystemParams) -> NoiseBudgetReport:
    """Worst-case decryption noise |<e, r> + e'| against the p/2 threshold."""
    key_term = (math.sqrt(params.u) * params.sigma_key
                * math.sqrt(params.u) * params.r_enc * NORM_TAIL_FACTOR)
    enc_term = tail_cut_for(params.sigma_noise)
    bound = key_term + enc_term
    limit = params.p / 2
    expected = beta_formula(params.u, params.alpha, params.q)
    beta_ok = abs(params.beta - expected) <= BETA_RTOL * abs(expected)
    return NoiseBudgetReport(key_term, enc_term, bound, limit, bound < limit, expected, beta_ok)


_INT_KEYS = ("p", "q", "u", "v", "n", "t", "rep", "lambda_sec")
_FLOAT_KEYS = ("alpha_q", "r_enc", "beta")


def parse_param_config(text: str) -> dict[str, SystemParams]:
    cp = configparser.ConfigParser()
    cp.read_string(text)
    sets = {}
    for section in cp.sections():
        raw = dict(cp[section])
        unknown = set(raw) - set(_INT_KEYS) - set(_FLOAT_KEYS) - {"backend"}
        if unknown:
            raise BeaconError("invalid-params", f"[{section}] unknown keys {sorted(unknown)}")
        try:
            kw = {k: int(raw[k]) for k in _INT_KEYS if k in raw}
            kw.update({k: float(raw[k]) for k in _FLOAT_KEYS if k in raw})
        except ValueError as exc:
            raise BeaconError("invalid-params", f"[{section}] {exc}") from None
        if "backend" in raw:
            kw["backend"] = raw["backend"]
        missing = {"p", "u", "v", "alpha_q", "r_enc"} - set(kw)
        if missing:
            raise BeaconError("invalid-params", f"[{section}] missing {sorted(missing)}")
        sets[section] = make_params(name=section, **kw)
    return sets


def load_param_sets(path: str | Path | None = None) -> dict[str, SystemParams]:
    if path is None:
        text = resources.files("latbeacon").joinpath("data/params.conf").read_text()
    else:
        text = Path(path).read_text()
    return parse_param_config(text)


def get_params(name: str, *, n: int | None = None, t: int | None = None,
               path: str | Path | None = None, allow_invalid: bool = False) -> SystemParams:
    sets = load_param_sets(path)
    if name not in sets:
        raise BeaconError("invalid-params", f"unknown parameter set {name!r}")
    params = sets[name]
    if n is not None or t is not None:
        params = params.with_nt(params.n if n is None else n, params.t if t is None else t)
    if not allow_invalid:
        params.check()
        report = validate_params(params)
        if not report.ok:
            raise BeaconError("invalid-params", f"{name}: {report.summary()}")
    return params
