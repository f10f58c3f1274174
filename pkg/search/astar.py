"""
Closed-set A* without reopenings.

Heap entries are (f, -g, v): ties in f go to the larger g, then the lower
vertex id. Every non-stale pop counts as one expansion, including the pop of
the target that ends the search.
"""

import heapq
import logging
from dataclasses import dataclass, field
from typing import List, Optional

from graphs.graph import Graph
from heuristics.alt import HeuristicSpec, ZeroHeuristic

logger = logging.getLogger(__name__)

EXPANSION_CONVENTION = "expansions=non-stale closed-set pops including the target pop"

_INF = float("inf")


@dataclass
class SearchResult:
    """Outcome of one s-t search"""
    found: bool
    cost: float
    path: List[int] = field(default_factory=list)
    expansions: int = 0
    heap_pushes: int = 0


def _check_vertex(graph: Graph, vertex: int, label: str) -> None:
    if not 0 <= int(vertex) < graph.num_vertices:
        raise ValueError(f"{label} {vertex} out of range [0, {graph.num_vertices})")


def _trace_path(parent: List[int], s: int, t: int) -> List[int]:
    path = [t]
    while path[-1] != s:
        path.append(parent[path[-1]])
    path.reverse()
    return path


def astar(graph: Graph, s: int, t: int, heuristic: Optional[HeuristicSpec] = None,
          bpmx: bool = False) -> SearchResult:
    """A* from s to t; with bpmx=True heuristic values are lifted by pathmax at each expansion"""
    _check_vertex(graph, s, "source")
    _check_vertex(graph, t, "target")
    s, t = int(s), int(t)
    heuristic = heuristic or ZeroHeuristic(graph.num_vertices)

    h = heuristic.to_target(t).tolist()
    adjacency = graph.out_adjacency
    lift_parent = bpmx and not graph.directed

    g = [_INF] * graph.num_vertices
    parent = [-1] * graph.num_vertices
    closed = [False] * graph.num_vertices

    g[s] = 0.0
    heap = [(h[s], -0.0, s)]
    pushes = 1
    expansions = 0

    while heap:
        _, neg_g, u = heapq.heappop(heap)
        gu = -neg_g
        if closed[u] or gu > g[u]:
            continue
        closed[u] = True
        expansions += 1
        if u == t:
            return SearchResult(True, g[t], _trace_path(parent, s, t), expansions, pushes)

        if bpmx:
            if lift_parent:
                for v, w in adjacency[u]:
                    if h[v] - w > h[u]:
                        h[u] = h[v] - w
            hu = h[u]
            for v, w in adjacency[u]:
                if hu - w > h[v]:
                    h[v] = hu - w

        for v, w in adjacency[u]:
            if closed[v]:
                continue
            candidate = gu + w
            if candidate < g[v]:
                g[v] = candidate
                parent[v] = u
                heapq.heappush(heap, (candidate + h[v], -candidate, v))
                pushes += 1

    logger.debug(f"No path from {s} to {t}")
    return SearchResult(False, _INF, [], expansions, pushes)


def dijkstra_search(graph: Graph, s: int, t: int) -> SearchResult:
    """Baseline search: A* with the zero heuristic"""
    return astar(graph, s, t, ZeroHeuristic(graph.num_vertices))


def path_cost(graph: Graph, path: List[int]) -> float:
    """Sum of the cheapest arc weight along each consecutive pair"""
    total = 0.0
    adjacency = graph.out_adjacency
    for u, v in zip(path, path[1:]):
        weights = [w for head, w in adjacency[u] if head == v]
        if not weights:
            raise ValueError(f"path uses missing arc {u}->{v}")
        total += min(weights)
    return total
