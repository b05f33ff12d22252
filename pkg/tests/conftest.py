import numpy as np
import pytest

from heraldkit.dispersion import FUSED_SILICA, BirefringentFiber
from heraldkit.jsa import build_jsa, default_grid
from heraldkit.phasematch import PumpEnvelope, calibrate_delta_n

REFERENCE_TRIPLE = (715.0, 618.0, 848.0)


@pytest.fixture(scope="session")
def ref_delta_n():
    return calibrate_delta_n(*REFERENCE_TRIPLE)


@pytest.fixture(scope="session")
def ref_fiber(ref_delta_n):
    return BirefringentFiber(FUSED_SILICA, ref_delta_n, 0.09)


@pytest.fixture(scope="session")
def ref_pump():
    return PumpEnvelope(715.0, 0.33)


@pytest.fixture(scope="session")
def ref_grid(ref_fiber, ref_pump):
    return default_grid(ref_fiber, ref_pump)


@pytest.fixture(scope="session")
def ref_jsa(ref_fiber, ref_pump, ref_grid):
    return build_jsa(ref_fiber, ref_pump, ref_grid)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion.

    The line is printed immediately and repeated in the terminal summary so
    it shows up without ``-s``.
    """
    state = {}

    def describe(number: int, text: str):
        state["label"] = f"criterion {number:2d}: {text}"

    yield describe
    rep = getattr(request.node, "rep_call", None)
    ok = rep is not None and rep.passed
    line = f"{'PASS' if ok else 'FAIL'} {state.get('label', request.node.name)}"
    ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
