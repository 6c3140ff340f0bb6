import re

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")

ACCEPTANCE = []


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE


def _order(rec):
    key = rec[0]
    return int(re.match(r"\d+", key).group()), key


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key, ok, detail in sorted(ACCEPTANCE, key=_order):
        terminalreporter.write_line(f"criterion {key:<4} {'PASS' if ok else 'FAIL'}  {detail}")
