from __future__ import annotations

import pytest

from specht_flats.census import line_census

# criterion number -> outcome, filled in by test_acceptance.py
ACCEPTANCE: dict[int, tuple[str, str]] = {}


@pytest.fixture(scope="session")
def census():
    cache = {}

    def get(n, l=2):
        if (n, l) not in cache:
            cache[(n, l)] = line_census(n, l)
        return cache[(n, l)]

    return get


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    crit = getattr(item.function, "criterion", None)
    if crit is None or rep.when != "call":
        return
    detail = ""
    if rep.failed and call.excinfo is not None:
        detail = str(call.excinfo.value).splitlines()[0] if str(call.excinfo.value) else call.excinfo.typename
    ACCEPTANCE[crit] = ("PASS" if rep.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE):
        status, detail = ACCEPTANCE[crit]
        tr.write_line(f"criterion {crit:2d}: {status}" + (f"  ({detail})" if detail else ""))
