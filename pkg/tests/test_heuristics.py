import numpy as np
import pytest

from conftest import floyd_warshall, random_connected_graph
from heuristics.alt import (AltHeuristic, CompressedHeuristic, HybridHeuristic, ZeroHeuristic, h_alt,
                            h_compressed, masked_difference)
from heuristics.smooth import smooth_max, smooth_min, soft_upper_max
from landmarks.labels import SENTINEL, LabelTable, build_labels
from landmarks.pool import LandmarkPool
from landmarks.selection import canonical_start_vertex, fps_select
from models.selector import compress, deploy, init_logits

TOL = 1e-9


def _pairwise(heuristic, n):
    """n x n matrix of h(u, t)"""
    return np.stack([heuristic.to_target(t) for t in range(n)], axis=1)


def _random_rows(rng, rows, k0):
    return rng.dirichlet(np.full(k0, 0.5), size=rows)


def test_masked_difference():
    out = masked_difference(np.array([5.0, SENTINEL, 3.0]), np.array([1.0, 2.0, SENTINEL]))
    assert out[0] == 4.0
    assert np.isneginf(out[1])
    assert np.isneginf(out[2])
    assert np.isneginf(masked_difference(np.float64(SENTINEL), np.float64(1.0)))


def test_alt_on_path_with_end_landmark(p7):
    labels = build_labels(p7, LandmarkPool.explicit([6]))
    heuristic = AltHeuristic(labels)
    assert heuristic.to_target(6).tolist() == [6.0, 5.0, 4.0, 3.0, 2.0, 1.0, 0.0]
    assert h_alt(labels, [0], [0], 2, 5) == 3.0
    assert heuristic.value(2, 5) == heuristic.to_target(5)[2]


def test_alt_masks_unreachable_terms():
    # landmark 1 reaches 2 but not 0; d_in says 0 reaches 1
    labels = LabelTable([1], np.array([[SENTINEL, 0.0, 2.0]]), np.array([[3.0, 0.0, SENTINEL]]), True)
    assert h_alt(labels, [0], [0], 1, 2) == 2.0
    assert h_alt(labels, [0], [0], 0, 2) == 0.0
    assert h_alt(labels, [], [], 0, 2) == 0.0


@pytest.mark.parametrize("directed", [False, True])
def test_alt_is_admissible_and_consistent(directed):
    for seed in range(5):
        graph = random_connected_graph(30, 40, seed, directed=directed)
        exact = floyd_warshall(graph)
        pool = fps_select(graph, 4, canonical_start_vertex(graph))
        heuristic = AltHeuristic(build_labels(graph, pool))
        h = _pairwise(heuristic, graph.num_vertices)

        assert np.all(h <= exact + TOL)
        assert np.all(h >= 0.0)
        for u, v, w in graph.edges():
            assert np.all(h[u] <= w + h[v] + TOL)
            if not directed:
                assert np.all(h[v] <= w + h[u] + TOL)


@pytest.mark.parametrize("directed", [False, True])
def test_row_stochastic_compression_never_beats_alt(directed):
    rng = np.random.default_rng(2024)
    for graph_index in range(50):
        n = int(rng.integers(15, 35))
        graph = random_connected_graph(n, int(rng.integers(n // 2, 2 * n)), 1000 + graph_index, directed=directed)
        exact = floyd_warshall(graph)
        k0 = 6
        labels = build_labels(graph, fps_select(graph, k0, canonical_start_vertex(graph)))
        h_full = _pairwise(AltHeuristic(labels), n)
        assert np.all(h_full <= exact * (1 + TOL) + TOL)

        for _ in range(20):
            m = int(rng.integers(1, 4))
            a_fwd = _random_rows(rng, m, k0)
            a_bwd = _random_rows(rng, m, k0) if directed else None
            h_a = _pairwise(CompressedHeuristic(compress(labels, a_fwd, a_bwd)), n)
            assert np.all(h_a <= h_full * (1 + TOL) + TOL)


@pytest.mark.parametrize("directed", [False, True])
def test_identity_selection_reproduces_alt_bitwise(directed):
    graph = random_connected_graph(60, 90, 5, directed=directed)
    k0 = 5
    labels = build_labels(graph, fps_select(graph, k0, canonical_start_vertex(graph)))
    m = 2 * k0 if directed else k0
    selector = init_logits(k0, m, "identity_first_m", directed=directed, boost=1.0, noise=0.0)
    compressed = CompressedHeuristic(deploy(selector, labels))
    alt = AltHeuristic(labels)

    rng = np.random.default_rng(1)
    pairs = rng.integers(0, graph.num_vertices, size=(1000, 2))
    for u, t in pairs.tolist():
        assert compressed.value(u, t) == alt.value(u, t)
    assert np.array_equal(compressed.to_target(3), alt.to_target(3))


def test_compressed_value_formula():
    y_fwd = np.array([[0.0], [2.0], [5.0]])
    y_bwd = np.array([[4.0], [1.0], [0.0]])
    assert h_compressed(y_fwd, y_bwd, 0, 2) == 5.0
    assert h_compressed(y_fwd, y_bwd, 2, 0) == 0.0
    assert h_compressed(y_fwd, y_bwd, 0, 1) == 3.0


def test_hybrid_is_pointwise_max(small_undirected):
    n = small_undirected.num_vertices
    exact = floyd_warshall(small_undirected)
    a = AltHeuristic(build_labels(small_undirected, LandmarkPool.explicit([0, 1])))
    b = AltHeuristic(build_labels(small_undirected, LandmarkPool.explicit([20, 29])))
    hybrid = HybridHeuristic(a, b)
    h = _pairwise(hybrid, n)

    assert np.array_equal(h, np.maximum(_pairwise(a, n), _pairwise(b, n)))
    assert np.all(h <= exact + TOL)
    assert hybrid.value(4, 9) == max(a.value(4, 9), b.value(4, 9))


def test_zero_heuristic():
    zero = ZeroHeuristic(4)
    assert zero.value(0, 3) == 0.0
    assert zero.to_target(1).tolist() == [0.0] * 4


def test_alt_subset_out_of_range(p7):
    labels = build_labels(p7, LandmarkPool.explicit([0, 6]))
    with pytest.raises(ValueError):
        AltHeuristic(labels, [2])
    assert AltHeuristic(labels, [1]).describe() == "alt(K=1)"


def test_smooth_surrogate_bounds():
    rng = np.random.default_rng(3)
    values = rng.normal(0.0, 5.0, size=(10_000, 7))
    m = values.shape[1]
    for T in (0.5, 2.0, 10.0):
        smooth = smooth_max(values, T, axis=1)
        assert np.all(smooth <= values.max(axis=1) + 1e-12)
        assert np.all(smooth >= values.max(axis=1) - np.log(m) / T - 1e-12)
        upper = soft_upper_max(values, T, axis=1)
        assert np.all(upper >= values.max(axis=1) - 1e-12)
        assert np.all(upper <= values.max(axis=1) + np.log(m) / T + 1e-12)
        assert np.all(smooth_min(values, T, axis=1) <= values.min(axis=1) + 1e-12)


def test_smooth_surrogates_reject_bad_input():
    with pytest.raises(ValueError):
        smooth_max([], 1.0)
    with pytest.raises(ValueError):
        smooth_min([1.0, 2.0], 0.0)
