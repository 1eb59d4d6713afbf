import math

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

PI = math.pi


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_omegas(n, seed):
    from qcm.cloner import ParamSet

    xs = np.random.default_rng(seed).uniform(0, PI, size=(n, 6))
    return [ParamSet.from_array(x) for x in xs]


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.format_results():
        terminalreporter.write_line(line)
