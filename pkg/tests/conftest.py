import pytest

from cuspfusion.datastore import join, split
from cuspfusion.models import JOINT, ONLY_A, ONLY_B, fit
from cuspfusion.sampler import SamplerConfig, sample_population

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def default_population():
    return sample_population(SamplerConfig(n=1000, seed=0))


@pytest.fixture(scope="session")
def large_population():
    return sample_population(SamplerConfig(n=10_000, seed=1))


@pytest.fixture(scope="session")
def holdout_population():
    return sample_population(SamplerConfig(n=10_000, seed=2))


@pytest.fixture(scope="session")
def large_joined(large_population):
    return join(*split(large_population))


@pytest.fixture(scope="session")
def holdout_joined(holdout_population):
    return join(*split(holdout_population))


@pytest.fixture(scope="session")
def large_models(large_joined):
    return {
        "a": fit(large_joined, ONLY_A, 1.0),
        "b": fit(large_joined, ONLY_B, 1.0),
        "joint": fit(large_joined, JOINT, 1.0),
    }


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
