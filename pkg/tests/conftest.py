import numpy as np
import pytest

from covimpute import ScenarioParams, generate
from covimpute.imputer import ALL_METHODS, impute
from covimpute.stochastics import RngStream

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def defaults():
    return ScenarioParams()


@pytest.fixture(scope="session")
def big_data(defaults):
    """One 10**6-row draw of the default scenario, shared across modules."""
    return generate(defaults, 10**6, RngStream(20240101))


@pytest.fixture(scope="session")
def big_imputed(big_data):
    return {m.name: impute(big_data, m, RngStream(20240102, i)) for i, m in enumerate(ALL_METHODS)}


@pytest.fixture
def rng():
    return RngStream(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
