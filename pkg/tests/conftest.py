import re

CRITERIA = {
    "A1": "monotone-target distance decays along Godunov runs",
    "A2": "ball functional decays along Lax-Friedrichs runs (1-D and 2-D)",
    "A3": "monotone projection agrees with brute force and inf-sup forms",
    "A4": "Holder-1/2 identity for shifted steps",
    "A5": "Riemann fan exactness and Godunov convergence rate",
    "A6": "maximum principle, order, L1 contraction, TV, mass",
    "A7": "L1-ball projection: threshold, nonexpansive, characterization",
    "A8": "interval-target distance decays along the A1 runs",
}

_outcomes: dict[str, list[str]] = {}
_PATTERN = re.compile(r"test_acceptance\.py::test_(A\d)_")


def pytest_runtest_logreport(report):
    m = _PATTERN.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or report.outcome != "passed":
        _outcomes.setdefault(m.group(1), []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for crit, text in CRITERIA.items():
        got = _outcomes.get(crit)
        if not got:
            status = "NOT RUN"
        elif all(o == "passed" for o in got):
            status = "PASS"
        else:
            status = "FAIL"
        terminalreporter.write_line(f"{crit} {status:7s} {text} ({len(got or [])} tests)")
