"""Shared pytest wiring: one pass/fail line per acceptance criterion."""

import re

_CRITERIA = {
    1: "certificate reproduction (jump benchmark)",
    2: "closed-form certificate grid (linear pull)",
    3: "transport distance oracle equivalence",
    4: "coupling invariants (ordering, coalescence, jumps)",
    5: "gap contraction envelope",
    6: "decay-functional probe",
    7: "moment-route decay bound",
    8: "contraction-route decay bound and rate improvement",
    9: "long-run law sanity",
    10: "byte-identical deterministic output",
}

_PATTERN = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes = {}
    for key in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(key, []):
            match = _PATTERN.search(report.nodeid)
            if match is None:
                continue
            number = int(match.group(1))
            ok = key == "passed"
            outcomes[number] = outcomes.get(number, True) and ok
    if not outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(outcomes):
        label = _CRITERIA.get(number, "?")
        verdict = "PASS" if outcomes[number] else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {label:.<52} {verdict}")
