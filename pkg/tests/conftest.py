import pytest

_LINES = pytest.StashKey[dict]()


@pytest.fixture
def acceptance_lines(request):
    """criterion number -> printed verdict line, shown in the terminal summary."""
    return request.config.stash.setdefault(_LINES, {})


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        terminalreporter.write_line(lines[n])
