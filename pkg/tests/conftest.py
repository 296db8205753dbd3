import math

import pytest
from hypothesis import HealthCheck, settings

from nvdd import SequenceFamily, from_hz, reduced_target

settings.register_profile(
    "nvdd", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("nvdd")

# criterion number -> [(check, passed, detail)], filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[n]
        ok = all(p for _, p, _ in checks)
        failed = [name for name, p, _ in checks if not p]
        tail = "all checks passed" if ok else "failed: " + ", ".join(failed)
        terminalreporter.write_line(f"CRITERION {n}: {'PASS' if ok else 'FAIL'} ({tail})")
        for name, p, detail in checks:
            terminalreporter.write_line(f"    [{'PASS' if p else 'FAIL'}] {name}: {detail}")


@pytest.fixture
def fig1_target():
    return reduced_target(from_hz(2e6), from_hz(200e3))


@pytest.fixture
def xy8_family():
    return SequenceFamily("xy8", from_hz(20e6))


@pytest.fixture
def weak_target():
    # A_perp = omega_av / 100
    return reduced_target(from_hz(2e6), from_hz(20e3))


TWO_PI = 2 * math.pi
