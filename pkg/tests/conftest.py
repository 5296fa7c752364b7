import os
import sys

import pytest
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from noisyvlmc import ChainLaw, ContextTree  # noqa: E402

DATA = os.path.join(os.path.dirname(os.path.dirname(__file__)), "data")

T1_ROWS = {"1": (0.7, 0.3), "00": (0.2, 0.8), "10": (0.6, 0.4)}
FLAT_ROWS = {"0": (0.3, 0.7), "1": (0.3, 0.7)}
DEEP_ROWS = {"1": (0.7, 0.3), "00": (0.2, 0.8), "010": (0.55, 0.45), "110": (0.85, 0.15)}


@pytest.fixture(scope="session")
def t1():
    return ContextTree(T1_ROWS)


@pytest.fixture(scope="session")
def t1_law(t1):
    return ChainLaw(t1)


@pytest.fixture(scope="session")
def flat():
    return ContextTree(FLAT_ROWS)


@pytest.fixture(scope="session")
def deep():
    return ContextTree(DEEP_ROWS)


@st.composite
def complete_trees(draw, max_height=3):
    """Random complete trees: grow from the root, splitting on the older side."""
    leaves = []
    stack = [""]
    while stack:
        w = stack.pop()
        if len(w) < max_height and (w == "" or draw(st.booleans())):
            stack.extend(["0" + w, "1" + w])
        else:
            leaves.append(w)
    probs = {}
    for w in leaves:
        p = draw(st.floats(0.05, 0.95))
        probs[w] = (1.0 - p, p)
    return ContextTree(probs)


_acceptance = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "acceptance" in report.keywords:
        _acceptance[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, outcome in sorted(_acceptance.items()):
        name = nodeid.split("::")[-1]
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
