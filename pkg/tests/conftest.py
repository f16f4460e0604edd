from __future__ import annotations

from collections import defaultdict

import pytest

_RESULTS: dict[str, list[tuple[str, str]]] = defaultdict(list)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    criterion = str(marker.args[0])
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _RESULTS[criterion].append((item.name, rep.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for criterion in sorted(_RESULTS, key=lambda c: (len(c), c)):
        outcomes = [o for _, o in _RESULTS[criterion]]
        if "failed" in outcomes:
            status = "FAIL"
        elif all(o == "skipped" for o in outcomes):
            status = "SKIP"
        else:
            status = "PASS"
        detail = ", ".join(f"{name}={o}" for name, o in _RESULTS[criterion])
        tr.write_line(f"criterion {criterion}: {status} ({detail})")
