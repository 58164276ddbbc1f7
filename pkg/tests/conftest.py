import numpy as np
import pytest

from g2flow import catalog
from g2flow.exterior import KForm

ACCEPTANCE_LINES = []


def rand_form(rng, n, k, scale=1.0):
    from math import comb

    return KForm(n, k, scale * rng.standard_normal(comb(n, k)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=catalog.TABLE_ROWS)
def table_row(request):
    return catalog.load(request.param)


@pytest.fixture(params=catalog.SOLITON_ROWS)
def soliton_row(request):
    return catalog.load(request.param)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
