"""Shared fixtures plus the acceptance-criterion summary hook.

test_acceptance.py records one verdict per numbered criterion; the hook
prints the whole slate at the end of the run, so the bottom of the pytest
output always shows one [PASS]/[FAIL] line per criterion even when an
assertion aborts a test early.
"""
import numpy as np
import pytest

from hetcycle import Params

_CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record_criterion():
    def _rec(num: int, passed: bool, detail: str) -> None:
        _CRITERIA[num] = (bool(passed), str(detail))

    return _rec


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        ok, detail = _CRITERIA[num]
        tag = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{tag}] criterion {num}: {detail}")


@pytest.fixture
def p_default() -> Params:
    return Params()


@pytest.fixture
def rng():
    return np.random.default_rng(20260822)
