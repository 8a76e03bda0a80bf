import pytest


def pytest_configure(config):
    config.acceptance_lines = []


@pytest.fixture
def record(pytestconfig):
    def _record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        pytestconfig.acceptance_lines.append((number, line))
        print(line)
    return _record


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
