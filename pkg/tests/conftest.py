import itertools

import numpy as np
import pytest

from regtower.graph import WeightedGraph


def random_graph(rng, n, kind="uniform"):
    """Random symmetric graph: uniform weights in [0, 1] or a 0/1 graph with p = 1/2."""
    if kind == "uniform":
        w = rng.random((n, n))
    else:
        w = (rng.random((n, n)) < 0.5).astype(float)
    w = np.triu(w, 1)
    return WeightedGraph(w + w.T)


def subsets(items):
    items = list(items)
    for r in range(len(items) + 1):
        yield from itertools.combinations(items, r)


def brute_irreg(g, X, Y):
    """Irregularity by enumerating every (U, W) pair, independent of the package kernel."""
    W = g.weights
    d = W[np.ix_(X, Y)].sum() / (len(X) * len(Y))
    best = 0.0
    for U in subsets(X):
        for Wset in subsets(Y):
            if U and Wset:
                e = W[np.ix_(U, Wset)].sum()
            else:
                e = 0.0
            best = max(best, abs(e - len(U) * len(Wset) * d))
    return best


def brute_max_deviation(D):
    """max over row and column subsets of |sum of D[A, B]| by full enumeration."""
    n, m = D.shape
    best = 0.0
    for A in subsets(range(n)):
        for B in subsets(range(m)):
            if A and B:
                best = max(best, abs(D[np.ix_(A, B)].sum()))
    return best


def cross_edge_graph():
    """Four vertices with a single weight-1 edge {0, 2}."""
    return WeightedGraph.from_edges(4, [(0, 2)])


def bipartite_halves_graph():
    """Complete bipartite graph between {0, 1} and {2, 3}."""
    return WeightedGraph.from_edges(4, [(0, 2), (0, 3), (1, 2), (1, 3)])


@pytest.fixture
def rng():
    return np.random.default_rng(20241016)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
