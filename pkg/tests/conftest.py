import pytest

from pvswipt.circuit import CircuitParams, spectral_response
from pvswipt.eh_models import EhModelParams


@pytest.fixture(scope="session")
def params():
    return CircuitParams()


@pytest.fixture(scope="session")
def model(params):
    return EhModelParams(params)


@pytest.fixture(scope="session")
def r950():
    return spectral_response(950e-9)


@pytest.fixture(scope="session")
def r400():
    return spectral_response(400e-9)


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line for the acceptance summary."""

    def _report(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        print(line)
        request.config._acceptance_lines.append(line)
        return ok

    return _report
