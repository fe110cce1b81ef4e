import pytest

_acceptance_key = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_acceptance_key] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(number, title, passed, detail)``."""
    lines = request.config.stash[_acceptance_key]

    def record(number: int, title: str, passed: bool, detail: str = "") -> bool:
        line = f"{'PASS' if passed else 'FAIL'}  [{number:2d}] {title}" + (f"  ({detail})" if detail else "")
        print(line)
        lines.append((number, line))
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_acceptance_key, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
