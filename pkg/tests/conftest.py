"""Shared test plumbing: the acceptance suite records one line per
criterion and the summary hook prints them after the run."""

_ACCEPTANCE_RESULTS = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    _ACCEPTANCE_RESULTS[number] = (ok, detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE_RESULTS):
        ok, detail = _ACCEPTANCE_RESULTS[number]
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {status} — {detail}")
