import json
import os

import numpy as np
import pytest

from frontcontrol.models import make_model

HERE = os.path.dirname(os.path.abspath(__file__))


@pytest.fixture(scope="session")
def oracle():
    with open(os.path.join(HERE, "oracles", "values.json")) as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def temple():
    return make_model("temple2")


@pytest.fixture(scope="session")
def gas():
    return make_model("gas")


@pytest.fixture(scope="session")
def burgers():
    return make_model("burgers")


@pytest.fixture(scope="session")
def psystem():
    return make_model("psystem")


def random_states(model, rng, k, margin=0.1):
    lo, hi = model.box[:, 0], model.box[:, 1]
    pad = margin * (hi - lo)
    return rng.uniform(lo + pad, hi - pad, (k, model.n))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
