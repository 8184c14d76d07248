import pytest

# criterion id -> verdict line, filled by test_acceptance
ACCEPTANCE = {}


@pytest.fixture
def record():
    def _record(cid, ok, text):
        line = f"{'PASS' if ok else 'FAIL'} criterion {cid}: {text}"
        ACCEPTANCE[cid] = line
        print(line)
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[cid])
