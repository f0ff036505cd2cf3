import os

import pytest

from smoothcert import kernels

ACCEPTANCE = []


def record(criterion, ok, detail=""):
    ACCEPTANCE.append((criterion, bool(ok), detail))


@pytest.fixture
def acceptance():
    return record


@pytest.fixture(params=sorted(kernels.available_backends()))
def backend(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in sorted(ACCEPTANCE, key=lambda t: t[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {criterion}: {detail}")


def pytest_report_header(config):
    return f"smoothcert kernels backend: {kernels.BACKEND} (pure-python forced: {bool(os.environ.get('SMOOTHCERT_PURE_PYTHON'))})"
