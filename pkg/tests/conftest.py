"""Prints one pass/fail line per acceptance criterion after the run."""

_GATE = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    key = props["criterion"]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        passed = report.outcome == "passed" and not hasattr(report, "wasxfail")
        _GATE[key] = (passed, props.get("summary", ""), props.get("measured", ""))


def pytest_terminal_summary(terminalreporter):
    if not _GATE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_GATE, key=int):
        passed, summary, measured = _GATE[key]
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {key}: {summary}"
        if measured:
            line += f" | measured: {measured}"
        terminalreporter.write_line(line)
