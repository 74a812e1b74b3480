"""Prints one pass/fail line per acceptance criterion after the run."""

ACCEPTANCE_RESULTS: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
  if not ACCEPTANCE_RESULTS:
    return
  terminalreporter.section("acceptance criteria")
  for number in sorted(ACCEPTANCE_RESULTS):
    terminalreporter.write_line(ACCEPTANCE_RESULTS[number])
