import pytest

_RESULTS = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the test body calls ``check(ok, detail)``."""
    lines = request.config.stash.setdefault(_RESULTS, [])
    name = request.node.name.removeprefix("test_")
    record = {}

    def check(ok: bool, detail: str) -> None:
        record["ok"], record["detail"] = bool(ok), detail
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        print(line)
        assert ok, line

    yield check
    if record:
        lines.append(f"[{'PASS' if record['ok'] else 'FAIL'}] {name}: {record['detail']}")
    else:
        lines.append(f"[FAIL] {name}: did not reach its check")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_RESULTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
