from itertools import combinations

import numpy as np
import pytest

from wccover.cover import cover_from_sets
from wccover.graph import build_graph


def clique_edges(nodes):
    return list(combinations(nodes, 2))


def random_graph(rng: np.random.Generator, n: int, p: float):
    edges = [(i, j) for i, j in combinations(range(n), 2) if rng.random() < p]
    if not edges:
        edges = [(0, 1)]
    return build_graph(edges)


def random_cover(rng: np.random.Generator, graph, communities: int | None = None):
    n = graph.node_count
    k = communities or int(rng.integers(1, max(2, n // 3) + 1))
    groups = []
    for _ in range(k):
        size = int(rng.integers(1, n + 1))
        groups.append(rng.choice(n, size=size, replace=False).tolist())
    return cover_from_sets(graph, groups)


def brute_triangles(graph):
    """Total triangle count by enumerating all node triples."""
    nb = graph.neighbor_sets
    return sum(
        1
        for a, b, c in combinations(range(graph.node_count), 3)
        if b in nb[a] and c in nb[a] and c in nb[b]
    )


@pytest.fixture
def k3_pendant():
    # a=0, b=1, c=2 form a triangle, d=3 hangs off a
    return build_graph([(0, 1), (0, 2), (1, 2), (0, 3)])


@pytest.fixture
def k4():
    return build_graph(clique_edges(range(4)))


@pytest.fixture
def path3():
    return build_graph([(0, 1), (1, 2)])


@pytest.fixture
def two_triangles():
    return build_graph([(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])


@pytest.fixture
def two_k4_shared():
    # node 3 belongs to both cliques
    return build_graph(clique_edges(range(4)) + clique_edges(range(3, 7)))


# criterion number -> (status, title, detail); filled by the acceptance suite
ACCEPTANCE_RESULTS: dict[int, tuple[str, str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_RESULTS):
        status, title, detail = ACCEPTANCE_RESULTS[k]
        terminalreporter.write_line(f"criterion {k:>2} {status:<4} {title}: {detail}")
