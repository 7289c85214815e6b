"""Collects the acceptance outcomes and prints one line per criterion."""

import re

CRITERIA = {
    1: "15-dimensional example reproduction",
    2: "decoding identity on random instances",
    3: "agreement of the correctability gates",
    4: "Kraus completeness and projection structure",
    5: "Wold uniqueness and block-wise classification",
    6: "cyclic identities and the flat-vector criterion",
    7: "direct-sum Weyl orthogonality",
    8: "dimension bound",
    9: "block decoders",
}

_outcomes: dict[int, str] = {}
_PATTERN = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_")


def pytest_runtest_logreport(report):
    m = _PATTERN.search(report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.failed:
        _outcomes[n] = "FAIL"
    elif report.when == "call" and report.passed:
        _outcomes.setdefault(n, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in CRITERIA.items():
        if n in _outcomes:
            terminalreporter.write_line(f"criterion {n}: {_outcomes[n]}  {title}")
