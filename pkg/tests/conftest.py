import sys
import pathlib

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).parent))

from tailnet.depnet import DependenceGraph  # noqa: E402


def make_graph(vertices, edges, sectors=None):
    return DependenceGraph(tuple(vertices), frozenset(tuple(e) for e in edges), None, sectors)


@pytest.fixture
def triangle():
    return make_graph("abc", [("a", "b"), ("b", "c"), ("a", "c")])


@pytest.fixture
def path3():
    return make_graph("abc", [("a", "b"), ("b", "c")])


@pytest.fixture
def barbell():
    """Two triangles joined by the bridge c-d."""
    return make_graph("abcdef", [("a", "b"), ("b", "c"), ("a", "c"),
                                 ("d", "e"), ("e", "f"), ("d", "f"), ("c", "d")])


# acceptance criteria report -------------------------------------------------

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
