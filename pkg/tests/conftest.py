import math

import pytest
from hypothesis import settings

from e2mac.lifetime import ClusterModel, PowerProfile, TrafficProfile
from e2mac.radio import RadioEnvironment

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

N0 = 10 ** (-204 / 10)
GAMMA = 10 ** (13 / 10)


def omega_h(d):
    return 10 ** ((128.1 + 37.6 * math.log10(d / 1000)) / 10)


def omega_m(d):
    return 10 ** ((38.5 + 20 * math.log10(d)) / 10)


@pytest.fixture
def env():
    return RadioEnvironment()


@pytest.fixture
def region_env():
    """Bandwidth split used by the small-region studies (w_h = 0.4 w_m)."""
    return RadioEnvironment(w_m=360e3, w_h=144e3)


@pytest.fixture
def power():
    return PowerProfile()


@pytest.fixture
def traffic():
    return TrafficProfile()


@pytest.fixture
def cluster():
    return ClusterModel()


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record a pass/fail line for an acceptance criterion, then assert it."""

    def record(number: int, ok: bool, detail: str) -> None:
        ACCEPTANCE[number] = (bool(ok), detail)
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
