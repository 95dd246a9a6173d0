import numpy as np
import pytest
from hypothesis import settings

from weakpde import synth

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def burgers():
    return synth.burgers_dataset()


@pytest.fixture(scope="session")
def ks():
    return synth.ks_dataset()


@pytest.fixture(scope="session")
def kdv():
    return synth.kdv_dataset()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
