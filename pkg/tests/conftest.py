import numpy as np
import pytest

from graphs.generators import gen_path
from graphs.graph import Graph


def random_connected_graph(n, extra_edges, seed, directed=False, integer_weights=False):
    """Random tree (undirected) or Hamiltonian cycle (directed) plus random extra edges"""
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    if directed:
        sources = order
        targets = np.roll(order, -1)
    else:
        sources = order[1:]
        targets = np.array([order[rng.integers(0, i)] for i in range(1, n)], dtype=np.int64)
    extra_s = rng.integers(0, n, size=extra_edges)
    extra_t = rng.integers(0, n, size=extra_edges)
    keep = extra_s != extra_t
    sources = np.concatenate([sources, extra_s[keep]])
    targets = np.concatenate([targets, extra_t[keep]])
    if integer_weights:
        weights = rng.integers(1, 10, size=len(sources)).astype(np.float64)
    else:
        weights = rng.uniform(1.0, 10.0, size=len(sources))
    kind = "d" if directed else "u"
    return Graph(n, sources, targets, weights, directed=directed, name=f"rand-{kind}{n}-s{seed}")


def random_tree(n, seed):
    return random_connected_graph(n, 0, seed, directed=False)


def floyd_warshall(graph):
    """All-pairs distances with np.inf for unreachable pairs"""
    n = graph.num_vertices
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for u, v, w in graph.edges():
        dist[u, v] = min(dist[u, v], w)
        if not graph.directed:
            dist[v, u] = min(dist[v, u], w)
    for k in range(n):
        dist = np.minimum(dist, dist[:, k:k + 1] + dist[k:k + 1, :])
    return dist


def bellman_ford(graph, source):
    """Single-source distances by edge relaxation"""
    dist = np.full(graph.num_vertices, np.inf)
    dist[source] = 0.0
    arcs = list(graph.edges())
    if not graph.directed:
        arcs += [(v, u, w) for u, v, w in arcs]
    for _ in range(graph.num_vertices - 1):
        changed = False
        for u, v, w in arcs:
            if dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                changed = True
        if not changed:
            break
    return dist


@pytest.fixture
def p7():
    return gen_path(7)


@pytest.fixture
def k5():
    return Graph(5, [0, 0, 0, 0, 1, 1, 1, 2, 2, 3], [1, 2, 3, 4, 2, 3, 4, 3, 4, 4], np.ones(10),
                 directed=False, name="k5")


@pytest.fixture
def small_undirected():
    return random_connected_graph(30, 40, seed=7)


@pytest.fixture
def small_directed():
    return random_connected_graph(30, 60, seed=11, directed=True)
