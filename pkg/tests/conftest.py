import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE: dict[int, dict] = {}


@pytest.fixture
def criterion(request):
    """Record one pass/fail line for an acceptance criterion; the test body sets the detail."""
    state = {"number": None, "title": "", "detail": ""}

    def start(number: int, title: str) -> dict:
        state.update(number=number, title=title)
        return state

    yield start
    if state["number"] is not None:
        failed = getattr(request.node, "_acceptance_failed", True)
        k = state["number"]
        prev = ACCEPTANCE.get(k)
        if prev is not None:
            failed = failed or prev["failed"]
            state["detail"] = f"{prev['detail']} {state['detail']}"
        ACCEPTANCE[k] = {"failed": failed, "title": state["title"], "detail": state["detail"]}


@pytest.hookimpl(tryfirst=True, hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item._acceptance_failed = not rep.passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            r = ACCEPTANCE[k]
            mark = "FAIL" if r["failed"] else "PASS"
            terminalreporter.write_line(f"criterion {k}: {mark}  {r['title']}  {r['detail'].strip()}")
