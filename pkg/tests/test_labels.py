import numpy as np
import pytest

from conftest import bellman_ford, floyd_warshall, random_connected_graph
from graphs.generators import gen_sbm
from graphs.graph import Graph
from landmarks.labels import (SENTINEL, LabelTable, build_labels, build_labels_cached, dijkstra_sssp,
                              label_cache_path, load_labels, save_labels)
from landmarks.pool import LandmarkPool
from utils.errors import ComponentError


def test_sssp_on_unit_clique():
    graph = gen_sbm(1, 5, 1.0, 0.0, 1.0, 1.0, seed=1)
    assert dijkstra_sssp(graph, 0).tolist() == [0.0, 1.0, 1.0, 1.0, 1.0]


@pytest.mark.parametrize("directed", [False, True])
def test_sssp_matches_oracles(directed):
    for seed in range(5):
        graph = random_connected_graph(25, 30, seed, directed=directed)
        exact = floyd_warshall(graph)
        for source in (0, 7, 24):
            assert np.allclose(dijkstra_sssp(graph, source), exact[source], rtol=0, atol=1e-9)
            assert np.allclose(dijkstra_sssp(graph, source, reversed=True), exact[:, source], rtol=0, atol=1e-9)
            assert np.allclose(dijkstra_sssp(graph, source), bellman_ford(graph, source), rtol=0, atol=1e-9)


def test_unreachable_is_sentinel():
    graph = Graph(3, [0], [1], [2.0], directed=True)
    row = dijkstra_sssp(graph, 1)
    assert row[0] == SENTINEL
    assert row[1] == 0.0
    assert row[2] == SENTINEL
    assert dijkstra_sssp(graph, 0, reversed=True).tolist() == [0.0, SENTINEL, SENTINEL]


def test_sssp_rejects_bad_source(k5):
    with pytest.raises(ValueError):
        dijkstra_sssp(k5, 5)


def test_build_labels_tables(small_directed):
    pool = LandmarkPool.explicit([3, 17])
    table = build_labels(small_directed, pool)
    exact = floyd_warshall(small_directed)

    assert table.k0 == 2
    assert table.num_vertices == small_directed.num_vertices
    assert np.allclose(table.d_out, exact[[3, 17], :])
    assert np.allclose(table.d_in, exact[:, [3, 17]].T)
    assert table.finite_vertices().all()


def test_undirected_labels_share_tables(small_undirected):
    table = build_labels(small_undirected, LandmarkPool.explicit([0, 5, 9]))
    assert table.d_in is table.d_out
    assert table.prefix(2).landmark_ids.tolist() == [0, 5]
    single = table.take([2])
    assert single.d_in is single.d_out
    assert table.indices_of([9, 0]).tolist() == [2, 0]
    with pytest.raises(ValueError):
        table.indices_of([1])


def test_landmark_outside_component_raises():
    # components {0, 1} and {2, 3, 4}; the larger one is designated
    graph = Graph(5, [0, 2, 3], [1, 3, 4], np.ones(3), directed=False)
    with pytest.raises(ComponentError):
        build_labels(graph, LandmarkPool.explicit([0]))


def test_narrowed_labels_keep_sentinel():
    table = LabelTable([1], np.array([[SENTINEL, 0.0, 2.5]]), np.array([[1.5, 0.0, SENTINEL]]), True)
    narrow = table.narrowed("float32")

    assert narrow.d_out.dtype == np.float32
    assert (narrow.d_out == SENTINEL).tolist() == [[True, False, False]]
    assert (narrow.d_in == SENTINEL).tolist() == [[False, False, True]]
    assert narrow.finite_vertices().tolist() == [False, True, False]
    assert table.narrowed("float64") is table


def test_label_file_keeps_values(tmp_path, small_directed):
    table = build_labels(small_directed, LandmarkPool.explicit([1, 2, 3]))
    loaded = load_labels(save_labels(table, tmp_path / "labels.bin"))

    assert loaded.directed
    assert loaded.landmark_ids.tolist() == [1, 2, 3]
    assert np.array_equal(loaded.d_out, table.d_out)
    assert np.array_equal(loaded.d_in, table.d_in)


def test_load_labels_rejects_foreign_file(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"NOTALABELFILE" + bytes(32))
    with pytest.raises(ValueError):
        load_labels(path)


def test_cached_labels_reuse_file(tmp_path, small_undirected):
    pool = LandmarkPool.explicit([4, 8])
    first = build_labels_cached(small_undirected, pool, tmp_path)
    path = label_cache_path(tmp_path, small_undirected, pool)
    assert path.exists()

    second = build_labels_cached(small_undirected, pool, tmp_path)
    assert np.array_equal(first.d_out, second.d_out)
    assert build_labels_cached(small_undirected, pool, None).k0 == 2
