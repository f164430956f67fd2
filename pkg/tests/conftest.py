"""Shared test plumbing: the acceptance-criteria summary block.

Acceptance tests record one verdict line each; the hook prints them as a
block at the end of the run so the criteria can be read off in one place.
"""

criterion_lines: list[str] = []


def record_criterion(name: str, ok: bool, detail: str) -> bool:
    criterion_lines.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return ok


def pytest_terminal_summary(terminalreporter):
    if criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in criterion_lines:
            terminalreporter.write_line(line)
