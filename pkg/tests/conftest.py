import numpy as np
import pytest

from fjopinions import WeightedGraph, generate_blockmodel


def gnp(n: int, p: float, seed: int) -> WeightedGraph:
    """Erdos-Renyi graph via the one-community blockmodel."""
    g, _ = generate_blockmodel((n,), p, 0.0, seed)
    return g


def gnp_with_edges(n: int, p: float, seed: int) -> WeightedGraph:
    """Like gnp but re-rolls the seed until the graph has at least one edge."""
    for offset in range(1000):
        g = gnp(n, p, seed + offset)
        if g.has_edges():
            return g
    raise AssertionError("could not draw a graph with edges")


def random_weighted_graph(n: int, p: float, rng: np.random.Generator) -> WeightedGraph:
    """Random graph with U(0.5, 2) weights, at least one edge."""
    while True:
        edges = []
        for u in range(n):
            for v in range(u + 1, n):
                if rng.random() < p:
                    edges.append((u, v, float(rng.uniform(0.5, 2.0))))
        if edges:
            return WeightedGraph.from_edges(n, edges)


@pytest.fixture
def k2():
    return WeightedGraph.from_edges(2, [(0, 1, 1.0)])


@pytest.fixture
def path3():
    return WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])


@pytest.fixture
def triangle():
    return WeightedGraph.from_edges(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)])
