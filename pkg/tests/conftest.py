import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from stabchain.graphs import Graph, fibonacci_graph, single_vertex_graph  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture(scope='session')
def fib():
    return fibonacci_graph()


@pytest.fixture(scope='session')
def two_loop():
    return single_vertex_graph(2)


@pytest.fixture(scope='session')
def skew():
    return Graph(np.array([[1, 1, 0], [0, 1, 1], [1, 1, 1]]))


def pytest_runtest_logreport(report):
    if report.when != 'call' or 'test_acceptance.py' not in report.nodeid:
        return
    doc = getattr(report, 'criterion', None)
    status = 'PASS' if report.passed else 'FAIL'
    name = report.nodeid.split('::')[-1]
    ACCEPTANCE_LINES.append(f"{status}  {name}" + (f"  {doc}" if doc else ''))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker('criterion')
    if marker:
        rep.criterion = marker.args[0]


def pytest_configure(config):
    config.addinivalue_line('markers', 'criterion(text): acceptance criterion description')


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section('acceptance criteria')
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
