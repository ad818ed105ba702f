import pytest

from hstfso.config import load_config
from hstfso.scenario import ScenarioConfig

# aperture figures derived from the reference areas (95 cm^2 and 9 cm^2)
RX_RADIUS = 0.0549903984232339544
RX_DIAMETER = 2 * RX_RADIUS
TX_DIAMETER = 0.0338513750128653772


@pytest.fixture(scope="session")
def table1() -> ScenarioConfig:
    return load_config("table1").scenario


# one line per acceptance criterion, filled by test_acceptance and echoed at the end of the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
