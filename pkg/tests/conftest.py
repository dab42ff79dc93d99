import pytest
from hypothesis import HealthCheck, settings

from spinlab.system import bromotrifluoroethylene

settings.register_profile(
    "spinlab", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("spinlab")

# filled by test_acceptance; echoed after the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def sys3():
    return bromotrifluoroethylene()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
