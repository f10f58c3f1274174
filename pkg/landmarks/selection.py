"""
Landmark pool construction and covering radius.

FPS runs on the shortest-path metric restricted to the designated component,
symmetrized as max(d(l, v), d(v, l)) on directed graphs. The first pick is the
vertex farthest from the start vertex; the start vertex itself is not part of
the pool unless a later step selects it. Ties go to the lowest vertex id.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from graphs.graph import ComponentReport, Graph, components
from heuristics.alt import AltHeuristic, masked_difference
from landmarks.labels import SENTINEL, LabelTable, _sssp_rows, build_labels
from landmarks.pool import LandmarkPool, PoolMethod
from search.astar import astar, dijkstra_search
from utils.errors import ComponentError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CoveringReport:
    """Covering radius of a landmark subset and the vertex attaining it"""
    r_m: float
    witness_vertex: int
    symmetrized: bool
    excluded: int = 0


def canonical_start_vertex(graph: Graph, report: Optional[ComponentReport] = None) -> int:
    """Lowest vertex id in the designated component"""
    report = report or components(graph)
    if len(report.designated) == 0:
        raise ValueError("graph has no vertices")
    return int(report.designated[0])


def _metric_row(graph: Graph, vertex: int) -> np.ndarray:
    """Distances from vertex under the FPS metric (symmetrized when directed)"""
    forward = _sssp_rows(graph, [vertex])[0]
    if not graph.directed:
        return forward
    return np.maximum(forward, _sssp_rows(graph, [vertex], reversed=True)[0])


def fps_select(graph: Graph, K: int, start_vertex: int, report: Optional[ComponentReport] = None) -> LandmarkPool:
    """Greedy farthest-point sequence of K landmarks inside the designated component"""
    report = report or components(graph)
    members = report.designated
    if not report.contains(start_vertex):
        raise ComponentError(f"start vertex {start_vertex} lies outside the designated component")
    if K < 1:
        raise ValueError(f"K must be at least 1, got {K}")
    if K > len(members):
        raise ValueError(f"K={K} exceeds component size {len(members)}")

    outside = np.ones(graph.num_vertices, dtype=bool)
    outside[members] = False

    nearest = _metric_row(graph, int(start_vertex))
    chosen: List[int] = []
    for _ in range(K):
        score = np.where(outside, -np.inf, nearest)
        score[chosen] = -np.inf
        # argmax returns the first maximum, i.e. the lowest vertex id
        pick = int(np.argmax(score))
        if not chosen:
            nearest = _metric_row(graph, pick)
        else:
            nearest = np.minimum(nearest, _metric_row(graph, pick))
        chosen.append(pick)

    logger.debug(f"FPS from {start_vertex}: {chosen}")
    return LandmarkPool(tuple(chosen), PoolMethod.FPS, start_vertex=int(start_vertex))


def _score_pool(graph: Graph, pool: LandmarkPool, queries: Sequence[Tuple[int, int]],
                report: ComponentReport) -> float:
    """Mean ALT expansions over the validation queries"""
    heuristic = AltHeuristic(build_labels(graph, pool, report))
    return float(np.mean([astar(graph, s, t, heuristic).expansions for s, t in queries]))


def fps_random_restart(graph: Graph, K: int, restarts: int, validation_queries: Sequence[Tuple[int, int]],
                       seed: int, n_jobs: int = 1, report: Optional[ComponentReport] = None) -> LandmarkPool:
    """FPS from several random starts; keep the pool with the best validation reduction"""
    if restarts < 1:
        raise ValueError(f"restarts must be at least 1, got {restarts}")
    queries = [(int(s), int(t)) for s, t in validation_queries]
    if not queries:
        raise ValueError("fps_random_restart needs a non-empty validation query set")

    report = report or components(graph)
    members = report.designated
    rng = np.random.default_rng(seed)
    starts = rng.choice(members, size=min(restarts, len(members)), replace=False)
    starts = sorted(int(v) for v in starts)

    pools = [fps_select(graph, K, start, report) for start in starts]
    scores = Parallel(n_jobs=n_jobs)(delayed(_score_pool)(graph, pool, queries, report) for pool in pools)

    baseline = float(np.mean([dijkstra_search(graph, s, t).expansions for s, t in queries]))
    # starts are sorted, so argmin keeps the lowest start on ties
    best = int(np.argmin(scores))
    logger.info(f"FPS-RR: best start {starts[best]} with {scores[best]:.1f} mean expansions "
                f"(Dijkstra {baseline:.1f}) over {len(starts)} restart(s)")
    chosen = pools[best]
    return LandmarkPool(chosen.landmark_ids, PoolMethod.FPS_RANDOM_RESTART, chosen.start_vertex, seed)


def _per_landmark_terms(labels: LabelTable, queries: Sequence[Tuple[int, int]]) -> np.ndarray:
    """K0 x Q matrix of each landmark's own ALT bound, masked terms at -inf"""
    sources = np.asarray([s for s, _ in queries], dtype=np.int64)
    targets = np.asarray([t for _, t in queries], dtype=np.int64)
    fwd = masked_difference(labels.d_out[:, targets], labels.d_out[:, sources])
    bwd = masked_difference(labels.d_in[:, sources], labels.d_in[:, targets])
    return np.maximum(fwd, bwd)


def greedy_max_oracle(labels: LabelTable, m: int, queries: Sequence[Tuple[int, int]]) -> LandmarkPool:
    """Greedily add the pool landmark that most raises the mean ALT bound over queries"""
    queries = list(queries)
    if not queries:
        raise ValueError("greedy_max_oracle needs a non-empty query set")
    if not 1 <= m <= labels.k0:
        raise ValueError(f"m={m} outside [1, {labels.k0}]")

    terms = _per_landmark_terms(labels, queries)
    current = np.zeros(len(queries))
    available = np.ones(labels.k0, dtype=bool)
    order: List[int] = []
    for _ in range(m):
        gains = np.maximum(current[None, :], terms).mean(axis=1)
        gains[~available] = -np.inf
        pick = int(np.argmax(gains))
        order.append(pick)
        available[pick] = False
        current = np.maximum(current, terms[pick])

    ids = tuple(int(v) for v in labels.landmark_ids[order])
    return LandmarkPool(ids, PoolMethod.GREEDY_MAX)


def random_subset(pool: LandmarkPool, m: int, seed: int) -> LandmarkPool:
    """m distinct pool landmarks drawn uniformly, kept in pool order"""
    if not 1 <= m <= len(pool):
        raise ValueError(f"m={m} outside [1, {len(pool)}]")
    rng = np.random.default_rng(seed)
    picks = np.sort(rng.choice(len(pool), size=m, replace=False))
    ids = tuple(pool.landmark_ids[i] for i in picks.tolist())
    return LandmarkPool(ids, PoolMethod.RANDOM_SUBSET, pool.start_vertex, seed)


def covering_radius(labels: LabelTable, subset: Sequence[int], symmetrized: Optional[bool] = None) -> CoveringReport:
    """max over reachable v of min over subset landmarks of the (symmetrized) distance"""
    subset = np.asarray(subset, dtype=np.int64).reshape(-1)
    if len(subset) == 0:
        raise ValueError("covering radius of an empty subset")
    if subset.min() < 0 or subset.max() >= labels.k0:
        raise ValueError(f"subset index outside [0, {labels.k0})")
    symmetrized = labels.directed if symmetrized is None else bool(symmetrized)

    rows = labels.symmetrized() if symmetrized else labels.d_out
    nearest = np.asarray(rows[subset], dtype=np.float64).min(axis=0)
    reachable = nearest != SENTINEL
    excluded = int(np.count_nonzero(~reachable))
    if not reachable.any():
        raise ValueError("no vertex is reachable from the subset")

    score = np.where(reachable, nearest, -np.inf)
    witness = int(np.argmax(score))
    return CoveringReport(float(score[witness]), witness, symmetrized, excluded)
