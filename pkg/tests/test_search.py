import numpy as np
import pytest

from conftest import floyd_warshall, random_connected_graph
from graphs.generators import gen_path
from graphs.graph import Graph
from heuristics.alt import AltHeuristic, HeuristicSpec
from landmarks.labels import SENTINEL, build_labels, dijkstra_sssp
from landmarks.pool import LandmarkPool
from landmarks.selection import canonical_start_vertex, fps_select
from search.astar import EXPANSION_CONVENTION, astar, dijkstra_search, path_cost
from search.audit import (AUDIT_COLUMNS, audit, audit_query, count_violations, records_to_frame, reduction_pct,
                          summarize_audit, write_audit_csv)


class InflatedHeuristic(HeuristicSpec):
    """Three times the exact distance; deliberately inadmissible"""
    kind = "inflated"

    def __init__(self, graph):
        self.graph = graph

    def to_target(self, t):
        exact = dijkstra_sssp(self.graph, t, reversed=True)
        return np.where(exact == SENTINEL, 0.0, 3.0 * exact)


@pytest.mark.parametrize("directed", [False, True])
def test_dijkstra_matches_floyd_warshall(directed):
    for seed in range(3):
        graph = random_connected_graph(35, 50, seed, directed=directed)
        exact = floyd_warshall(graph)
        for s, t in [(0, 34), (12, 3), (20, 21), (7, 7)]:
            result = dijkstra_search(graph, s, t)
            assert result.found
            assert abs(result.cost - exact[s, t]) <= 1e-9
            assert result.path[0] == s and result.path[-1] == t
            assert abs(path_cost(graph, result.path) - result.cost) <= 1e-9


@pytest.mark.parametrize("directed", [False, True])
def test_alt_search_is_optimal_and_expands_less(directed):
    graph = random_connected_graph(80, 160, 4, directed=directed)
    exact = floyd_warshall(graph)
    heuristic = AltHeuristic(build_labels(graph, fps_select(graph, 6, canonical_start_vertex(graph))))
    rng = np.random.default_rng(0)
    for s, t in rng.integers(0, graph.num_vertices, size=(30, 2)).tolist():
        baseline = dijkstra_search(graph, s, t)
        result = astar(graph, s, t, heuristic)
        assert abs(result.cost - exact[s, t]) <= 1e-9
        assert result.expansions <= baseline.expansions


def test_expansion_counts_on_path(p7):
    assert dijkstra_search(p7, 3, 6).expansions == 7

    heuristic = AltHeuristic(build_labels(p7, LandmarkPool.explicit([6])))
    result = astar(p7, 3, 6, heuristic)
    assert result.expansions == 4
    assert result.path == [3, 4, 5, 6]
    assert result.cost == 3.0


def test_source_equals_target(p7):
    result = dijkstra_search(p7, 2, 2)
    assert result.found
    assert result.cost == 0.0
    assert result.path == [2]
    assert result.expansions == 1


def test_unreachable_target():
    graph = Graph(3, [0], [1], [1.0], directed=True)
    result = dijkstra_search(graph, 0, 2)
    assert not result.found
    assert result.cost == float("inf")
    assert result.path == []
    assert result.expansions == 2


def test_bad_endpoints(p7):
    with pytest.raises(ValueError):
        astar(p7, 0, 7)
    with pytest.raises(ValueError):
        astar(p7, -1, 3)


def test_path_cost_takes_cheapest_parallel_arc():
    graph = Graph(3, [0, 0, 1], [1, 1, 2], [5.0, 2.0, 1.0], directed=True)
    assert path_cost(graph, [0, 1, 2]) == 3.0
    assert dijkstra_search(graph, 0, 2).cost == 3.0
    with pytest.raises(ValueError):
        path_cost(graph, [2, 0])


def test_count_violations_skips_unreachable():
    exact = np.array([0.0, 4.0, SENTINEL, 2.0])
    h = np.array([0.0, 5.0, 100.0, 2.0])
    assert count_violations(h, exact, np.arange(4)) == 1
    assert count_violations(h, exact, np.array([0, 2, 3])) == 0


def test_audit_of_alt_is_clean(small_directed):
    heuristic = AltHeuristic(build_labels(small_directed, LandmarkPool.explicit([0, 9, 18])))
    records = audit(small_directed, [(0, 29), (4, 13), (25, 2)], heuristic)
    frame = records_to_frame(records)

    assert list(frame.columns) == AUDIT_COLUMNS
    assert frame["heuristic_violations"].sum() == 0
    assert not frame["suboptimal"].any()
    assert (frame["checked_vertices"] == small_directed.num_vertices).all()
    assert np.allclose(frame["method_cost"], frame["dijkstra_cost"], rtol=1e-12)

    summary = summarize_audit(records)
    assert summary["queries"] == 3
    assert summary["violations"] == 0
    assert summary["mean_expansions"] <= summary["mean_dijkstra_expansions"]


def test_audit_flags_inadmissible_heuristic(p7):
    record, result = audit_query(p7, 0, 0, 6, InflatedHeuristic(p7))
    assert record.heuristic_violations == 6
    # a path graph has a single route, so the cost is still optimal
    assert not record.suboptimal
    assert result.cost == 6.0


def test_audit_on_large_graph_checks_dijkstra_tree():
    graph = gen_path(300)
    record, _ = audit_query(graph, 0, 0, 10, AltHeuristic(build_labels(graph, LandmarkPool.explicit([299]))))
    assert record.checked_vertices == 11
    assert record.heuristic_violations == 0


def test_reduction_pct():
    assert reduction_pct(25.0, 100.0) == 75.0
    assert reduction_pct(5.0, 0.0) == 0.0
    assert summarize_audit([])["queries"] == 0


def test_audit_csv_records_convention(tmp_path, p7):
    records = audit(p7, [(0, 6)], AltHeuristic(build_labels(p7, LandmarkPool.explicit([0]))))
    path = write_audit_csv(records, tmp_path / "audit.csv", ["# tool=test"])
    text = path.read_text()
    assert f"# {EXPANSION_CONVENTION}" in text
    assert text.splitlines()[0] == "# tool=test"
