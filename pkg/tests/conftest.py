"""Shared pytest plumbing: acceptance-criterion result lines.

Acceptance tests record one human-readable line per criterion; the terminal
summary re-prints them so the table is visible even with output capture on.
"""

ACCEPTANCE_LINES: list = []


def record_acceptance(number: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    line = f"ACCEPTANCE C{number} {name}: {status}"
    if detail:
        line += f"  [{detail}]"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
