"""Per-criterion pass/fail summary for the acceptance suite.

Tests tagged ``@pytest.mark.criterion(n)`` roll up into one line per
criterion in the terminal summary; a criterion passes only if every tagged
test passes. Tests may attach a short measured value through the ``note``
fixture.
"""

from collections import defaultdict

import pytest

CRITERIA = {
    1: "closed forms agree with 1e7-sample Monte Carlo within 3 std. err.",
    2: "c1 identities: sampling, quadrature, monotonicity, gap growth, concavity",
    3: "bi >= uni >= conventional NOMA on the 81-point grid and per realization",
    4: "bi minus OMA ergodic gap strictly positive for equal variances",
    5: "fairness bisection, max-sum-rate bisection and system-outage boundary",
    6: "outage closed forms match event counting within 3 binomial std. err.",
    7: "diversity orders 2 for cooperative user 1, 1 elsewhere",
    8: "structural outage equalities between bi and uni",
    9: "no-CSIT bi sum rate exceeds OMA by 15% +/- 5 points at d1 = d2 = 40",
    10: "multi-user reduction bit-match and bi >= uni >= NOMA across ring widths",
    11: "recipes byte-identical across thread counts",
}

_outcomes: dict[int, list[bool]] = defaultdict(list)
_notes: dict[int, list[str]] = defaultdict(list)
_by_node: dict[str, int] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _by_node[item.nodeid] = int(m.args[0])


@pytest.fixture
def note(request):
    m = request.node.get_closest_marker("criterion")
    n = int(m.args[0]) if m else 0
    return lambda text: _notes[n].append(str(text))


def pytest_runtest_logreport(report):
    n = _by_node.get(report.nodeid)
    if n is None:
        return
    if report.failed or (report.when == "call" and report.passed):
        _outcomes[n].append(report.passed)
    elif report.skipped and report.when in ("setup", "call"):
        _outcomes[n].append(False)


def pytest_terminal_summary(terminalreporter):
    if not _by_node:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, text in CRITERIA.items():
        res = _outcomes.get(n)
        if not res:
            status = "NOT RUN"
        else:
            status = "PASS" if all(res) else "FAIL"
        line = f"[{status}] criterion {n}: {text}"
        if _notes.get(n):
            line += " | " + "; ".join(_notes[n])
        tr.write_line(line)
