import numpy as np
import pytest
from hypothesis import strategies as st

from leadersel.graphs import Graph, build_graph, is_connected, six_node_example


def random_connected_graph(rng: np.random.Generator, n: int, p: float = 0.5) -> Graph:
    """Rejection-sample a connected unit-weight graph."""
    while True:
        edges = [
            (i, j, 1.0)
            for i in range(n)
            for j in range(i + 1, n)
            if rng.random() < p
        ]
        g = build_graph(n, edges)
        if is_connected(g):
            return g


@st.composite
def graphs(draw, min_nodes: int = 2, max_nodes: int = 7, connected: bool = True):
    """Unit-weight graph strategy; a random spanning path keeps it connected."""
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    chosen = {pair for pair, keep in zip(pairs, mask) if keep}
    if connected:
        order = draw(st.permutations(range(n)))
        for a, b in zip(order, order[1:]):
            chosen.add((min(a, b), max(a, b)))
    return build_graph(n, [(u, v, 1.0) for u, v in sorted(chosen)])


@pytest.fixture(scope="session")
def six_node():
    return six_node_example()
