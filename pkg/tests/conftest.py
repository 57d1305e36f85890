import os

import pytest
from hypothesis import HealthCheck, settings

from latbeacon.core import Rng
from latbeacon.params import get_params
from latbeacon.pvss import pvss_setup

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# criterion number -> (passed, detail); filled by test_acceptance.py
CRITERIA: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    CRITERIA[number] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        passed, detail = CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def toy():
    return get_params("toy")


@pytest.fixture(scope="session")
def toy_pp(toy):
    return pvss_setup(toy, Rng.from_int(1).seed)


@pytest.fixture
def rng(request):
    """Per-test stream keyed by the test id so tests stay independent."""
    return Rng(Rng.derive_seed(bytes(32), request.node.nodeid))
