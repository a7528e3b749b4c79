import pytest

_acceptance: dict[str, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    label = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = "PASS" if rep.outcome == "passed" else "FAIL"
        note = getattr(item, "acceptance_note", "")
        _acceptance[item.nodeid] = (label, f"{status}  {label}{'  (' + note + ')' if note else ''}")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_acceptance.values(), key=lambda v: v[0]):
        terminalreporter.write_line(line)


@pytest.fixture
def note(request):
    """Attach a short measurement string to the acceptance summary line."""
    def record(text):
        request.node.acceptance_note = text
    return record
