import os
import sys

import pytest

from fieldcover.field import normalize
from fieldcover.graph import build_graph
from fieldcover.oracle import make_rect_field

HERE = os.path.dirname(__file__)
FIXTURES = os.path.join(os.path.dirname(HERE), "fixtures")
sys.path.insert(0, HERE)


def fixture_path(name):
    return os.path.join(FIXTURES, name)


def rect_graph(n, r=7.0, ql=10.0, h0=500.0, w0=36.0):
    spec = make_rect_field(h0, n, w0, r, ql)
    nf, chain = normalize(spec)
    return build_graph(nf), nf, chain


@pytest.fixture(scope="session")
def rect9():
    return rect_graph(9)


ACCEPTANCE = {}


def record(criterion, ok, detail):
    """Store one acceptance verdict; the terminal summary prints them in order."""
    ACCEPTANCE[criterion] = (bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'} - {detail}")
