import sys
from pathlib import Path

import networkx as nx
import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_LINES = []


def random_connected_graph(rng, n_min=2, n_max=8, p=None):
    while True:
        n = int(rng.integers(n_min, n_max + 1))
        prob = rng.uniform(0.2, 0.9) if p is None else p
        g = nx.gnp_random_graph(n, prob, seed=int(rng.integers(2**31)))
        if g.number_of_edges() and nx.is_connected(g):
            return g


def random_tree(rng, n_min=2, n_max=50):
    n = int(rng.integers(n_min, n_max + 1))
    if n == 2:
        return nx.path_graph(2)
    prufer = rng.integers(0, n, size=n - 2).tolist()
    return nx.from_prufer_sequence(prufer)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def record_acceptance(number: int, passed: bool, text: str):
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {text}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
