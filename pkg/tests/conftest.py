from __future__ import annotations

import numpy as np
import pytest

from inexact_krylov.problems import SpectrumSpec, gen_synthetic, make_problem

_ACCEPTANCE: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    number, title = mark.args
    measured = "; ".join(f"{k}={v}" for k, v in item.user_properties)
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        _ACCEPTANCE[number] = (title, status, measured)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status, measured = _ACCEPTANCE[number]
        line = f"AC{number:<2} {status}  {title}"
        if measured:
            line += f"  [{measured}]"
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def small_problem():
    return gen_synthetic(SpectrumSpec(50, 1e2), 3)


@pytest.fixture(scope="session")
def desk_problems():
    """n = 200 synthetic problems used by the banded reproductions."""
    return {k: gen_synthetic(SpectrumSpec(200, k), 7) for k in (1e1, 1e2, 1e3, 1e4)}


@pytest.fixture
def diag28():
    return make_problem(np.diag([2.0, 8.0]), np.array([2.0, 4.0]), name="diag28")
