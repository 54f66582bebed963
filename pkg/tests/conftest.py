import numpy as np
import pytest

from twomode.dynamics import constant_schedule, propagate
from twomode.hamiltonian import TwoModeParams, ground_state, low_spectrum


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger (or load cached) numba compilation once, outside any timed check."""
    st = ground_state(TwoModeParams(4, -0.1, 1.0), warn=False).state
    low_spectrum(TwoModeParams(400, 0.1, 1.0), 2)
    ground_state(TwoModeParams(400, 0.1, 1.0), warn=False)
    propagate(st, constant_schedule(0.0, 0.01, 0.1, 1.0), 0.0, 0.01, 1e-3, exact_free=False)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_state(rng, n):
    from twomode.hilbert import SpinState

    v = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
    return SpinState(n, v).normalized()


# --- acceptance summary ------------------------------------------------------------

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for key, value in report.user_properties:
        if key == "criterion":
            number, title = value
            _ACCEPTANCE[number] = (title, report.outcome, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, outcome, duration = _ACCEPTANCE[number]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}  {verdict}  {title}  ({duration:.2f} s)")
