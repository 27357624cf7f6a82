import time

import numpy as np
import pytest

from gvcsim.controller import make_levels
from gvcsim.traces import ThroughputTrace

SUITE_BUDGET_S = 60.0

_state = {"start": None, "acceptance_lines": [], "ran_acceptance": False}


def acceptance_line(number, title, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}"
    if detail:
        line += f" ({detail})"
    _state["acceptance_lines"].append((number, line))
    _state["ran_acceptance"] = True
    print(line)
    return ok


@pytest.fixture
def record_criterion():
    return acceptance_line


def pytest_sessionstart(session):
    _state["start"] = time.perf_counter()


@pytest.hookimpl(tryfirst=True)
def pytest_sessionfinish(session, exitstatus):
    if not _state["ran_acceptance"]:
        return
    elapsed = time.perf_counter() - _state["start"]
    ok = elapsed < SUITE_BUDGET_S
    acceptance_line(10, "full suite wall-clock under 60 s", ok, f"{elapsed:.1f} s")
    if not ok and session.exitstatus == 0:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    lines = _state["acceptance_lines"]
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines, key=lambda x: x[0]):
        terminalreporter.write_line(line)


@pytest.fixture
def doubling_levels():
    """Five levels with q = 1..5 and doubling generation delays."""
    return make_levels([1, 2, 3, 4, 5], [0.1, 0.2, 0.4, 0.8, 1.6], [0.5, 1.0, 1.5, 2.0, 2.5])


def constant_trace(mbps, duration):
    return ThroughputTrace([0.0], [mbps], duration=duration)


def random_trace(rng, n_segments=None, max_bw=5.0, allow_zero=True):
    n = int(n_segments or rng.integers(1, 12))
    widths = rng.uniform(0.05, 3.0, size=n)
    times = np.concatenate([[0.0], np.cumsum(widths)])
    bws = rng.uniform(0.0 if allow_zero else 0.1, max_bw, size=n)
    if allow_zero:
        bws[rng.random(n) < 0.15] = 0.0
    return ThroughputTrace(times[:-1], bws, duration=times[-1])
