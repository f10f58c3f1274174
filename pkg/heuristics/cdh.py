"""
Compressed differential heuristic: each vertex keeps only its r farthest pivot
distances (plus indices). Missing distances can be bounded through the P x P
pivot-pivot side table.

Bound matrices are derived once at build time. For every vertex v and pivot p they hold:
lower/upper bounds on d(p, v) (forward) and on d(v, p) (backward). Stored
entries are exact. Missing entries are bounded through the pivots the vertex keeps.
"""

import heapq
import logging
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from graphs.graph import Graph
from heuristics.alt import HeuristicSpec
from landmarks.labels import SENTINEL, LabelTable

logger = logging.getLogger(__name__)

_CDH_MAGIC = b"LMKCDH01"
_CDH_HEADER = struct.Struct("<8sIIQB")

CDH_MODES = ("strict", "substitution")


@dataclass(eq=False)
class CdhLabels:
    """Per-vertex pivot subsets with the pivot-pivot side table"""
    pool_size: int
    r: int
    directed: bool
    stored_out: np.ndarray
    values_out: np.ndarray
    stored_in: np.ndarray
    values_in: np.ndarray
    pivot_pivot: np.ndarray
    selection_rule: str = "top_r_farthest"
    bounds: dict = field(default_factory=dict, repr=False)

    @property
    def num_vertices(self) -> int:
        return self.stored_out.shape[0]

    def entries_per_vertex(self) -> int:
        """Stored (index, distance) pairs per vertex across directions"""
        if not self.directed:
            return self.stored_out.shape[1]
        return self.stored_out.shape[1] + self.stored_in.shape[1]


def _top_r_farthest(rows: np.ndarray, r: int) -> Tuple[np.ndarray, np.ndarray]:
    """Per vertex (column) the r pivots with largest finite distance, ties to lowest index"""
    key = np.where(rows == SENTINEL, -np.inf, rows.astype(np.float64))
    # stable sort on the negated key keeps lower pivot indices first among ties
    order = np.argsort(-key, axis=0, kind="stable")[:r]
    stored = order.T.astype(np.int64)
    values = np.take_along_axis(rows, order, axis=0).T.astype(np.float64)
    return stored, values


def _dense(stored: np.ndarray, values: np.ndarray, pool_size: int) -> Tuple[np.ndarray, np.ndarray]:
    """Scatter per-vertex lists into V x P known-mask and value matrices"""
    num_vertices = stored.shape[0]
    known = np.zeros((num_vertices, pool_size), dtype=bool)
    dense = np.zeros((num_vertices, pool_size), dtype=np.float64)
    rows = np.repeat(np.arange(num_vertices), stored.shape[1])
    cols = stored.reshape(-1)
    flat = values.reshape(-1)
    finite = flat != SENTINEL
    known[rows[finite], cols[finite]] = True
    dense[rows[finite], cols[finite]] = flat[finite]
    return known, dense


def _derive_bounds(cdh: CdhLabels) -> dict:
    """Lower/upper bound matrices on d(p, v) and d(v, p) for all v, p"""
    pp = np.where(cdh.pivot_pivot == SENTINEL, np.inf, cdh.pivot_pivot)
    known_out, dense_out = _dense(cdh.stored_out, cdh.values_out, cdh.pool_size)
    if cdh.directed:
        known_in, dense_in = _dense(cdh.stored_in, cdh.values_in, cdh.pool_size)
    else:
        known_in, dense_in = known_out, dense_out

    shape = known_out.shape
    upper_out = np.full(shape, np.inf)
    lower_out = np.zeros(shape)
    upper_in = np.full(shape, np.inf)
    lower_in = np.zeros(shape)

    def slots(stored, values):
        for j in range(stored.shape[1]):
            q = stored[:, j]
            dq = values[:, j]
            valid = dq != SENTINEL
            yield q, np.where(valid, dq, np.nan), valid

    # through pivots q kept forward at v: d(q, v) known
    for q, dq, valid in slots(cdh.stored_out, cdh.values_out):
        v_idx = np.flatnonzero(valid)
        q_v, d_v = q[v_idx], dq[v_idx][:, None]
        # d(p, v) <= d(p, q) + d(q, v)
        upper_out[v_idx] = np.minimum(upper_out[v_idx], pp[:, q_v].T + d_v)
        # d(p, v) >= d(q, v) - d(q, p)
        lower_out[v_idx] = np.fmax(lower_out[v_idx], d_v - pp[q_v, :])
        # d(v, p) >= d(q, p) - d(q, v)
        lower_in[v_idx] = np.fmax(lower_in[v_idx], np.where(np.isinf(pp[q_v, :]), -np.inf, pp[q_v, :] - d_v))

    # through pivots q kept backward at v: d(v, q) known
    for q, dq, valid in slots(cdh.stored_in, cdh.values_in):
        v_idx = np.flatnonzero(valid)
        q_v, d_v = q[v_idx], dq[v_idx][:, None]
        # d(v, p) <= d(v, q) + d(q, p)
        upper_in[v_idx] = np.minimum(upper_in[v_idx], pp[q_v, :] + d_v)
        # d(v, p) >= d(v, q) - d(p, q)
        lower_in[v_idx] = np.fmax(lower_in[v_idx], d_v - pp[:, q_v].T)
        # d(p, v) >= d(p, q) - d(v, q)
        lower_out[v_idx] = np.fmax(lower_out[v_idx], np.where(np.isinf(pp[:, q_v].T), -np.inf, pp[:, q_v].T - d_v))

    # stored entries are exact
    upper_out[known_out] = dense_out[known_out]
    lower_out[known_out] = dense_out[known_out]
    upper_in[known_in] = dense_in[known_in]
    lower_in[known_in] = dense_in[known_in]

    return {
        "known_out": known_out, "dense_out": dense_out,
        "known_in": known_in, "dense_in": dense_in,
        "lower_out": lower_out, "upper_out": upper_out,
        "lower_in": lower_in, "upper_in": upper_in,
    }


def build_cdh(labels: LabelTable, r: int) -> CdhLabels:
    """Keep the r farthest pivots per vertex (r halved per direction on directed graphs)"""
    pool_size = labels.k0
    if r < 1:
        raise ValueError(f"CDH needs r >= 1, got {r}")
    if r > pool_size:
        raise ValueError(f"CDH r={r} exceeds pool size {pool_size}")

    per_direction = max(1, r // 2) if labels.directed else r
    stored_out, values_out = _top_r_farthest(labels.d_out, per_direction)
    if labels.directed:
        stored_in, values_in = _top_r_farthest(labels.d_in, per_direction)
    else:
        stored_in, values_in = stored_out, values_out

    pivot_pivot = np.asarray(labels.d_out[:, labels.landmark_ids], dtype=np.float64)
    cdh = CdhLabels(pool_size, per_direction, labels.directed, stored_out, values_out,
                    stored_in, values_in, pivot_pivot)
    cdh.bounds = _derive_bounds(cdh)
    logger.info(f"Built CDH labels: P={pool_size}, r={per_direction} per direction")
    return cdh


def _strict_terms(cdh: CdhLabels, t: int) -> np.ndarray:
    b = cdh.bounds
    fwd = np.where(b["known_out"] & b["known_out"][t], b["dense_out"][t] - b["dense_out"], -np.inf)
    bwd = np.where(b["known_in"] & b["known_in"][t], b["dense_in"] - b["dense_in"][t], -np.inf)
    return np.concatenate([fwd, bwd], axis=1)


def _substitution_terms(cdh: CdhLabels, t: int) -> np.ndarray:
    b = cdh.bounds
    with np.errstate(invalid="ignore"):
        # d(u, t) >= d(p, t) - d(p, u) >= lower(p, t) - upper(p, u)
        fwd = b["lower_out"][t] - b["upper_out"]
        fwd = np.where(b["known_out"] | b["known_out"][t], fwd, -np.inf)
        # d(u, t) >= d(u, p) - d(t, p) >= lower(u, p) - upper(t, p)
        bwd = b["lower_in"] - b["upper_in"][t]
        bwd = np.where(b["known_in"] | b["known_in"][t], bwd, -np.inf)
    terms = np.concatenate([fwd, bwd], axis=1)
    return np.where(np.isnan(terms), -np.inf, terms)


def h_cdh(cdh: CdhLabels, u: int, t: int, mode: str = "strict") -> float:
    """CDH heuristic for one pair"""
    return float(cdh_to_target(cdh, t, mode)[u])


def cdh_to_target(cdh: CdhLabels, t: int, mode: str = "strict") -> np.ndarray:
    """CDH heuristic h(v, t) for every vertex v"""
    if mode not in CDH_MODES:
        raise ValueError(f"unknown CDH mode {mode!r}, expected one of {CDH_MODES}")
    terms = _strict_terms(cdh, t) if mode == "strict" else _substitution_terms(cdh, t)
    if terms.shape[1] == 0:
        return np.zeros(cdh.num_vertices)
    h = np.maximum(terms.max(axis=1), 0.0)
    h[t] = 0.0
    return h


def consistent_targets(graph: Graph, h: np.ndarray) -> np.ndarray:
    """Largest h' <= h with h'(u) <= w(u, v) + h'(v) on every arc u -> v

    h'(u) = min over x of h(x) + d(u, x), settled by a multi-source Dijkstra
    over the reversed arcs seeded with h itself.
    """
    values = np.asarray(h, dtype=np.float64).tolist()
    if len(values) != graph.num_vertices:
        raise ValueError(f"heuristic has {len(values)} entries for {graph.num_vertices} vertices")
    reverse = graph.to_sparse(reverse=True)
    indptr, tails, weights = reverse.indptr.tolist(), reverse.indices.tolist(), reverse.data.tolist()

    heap = [(value, v) for v, value in enumerate(values)]
    heapq.heapify(heap)
    settled = [False] * len(values)
    while heap:
        hv, v = heapq.heappop(heap)
        if settled[v] or hv > values[v]:
            continue
        settled[v] = True
        for idx in range(indptr[v], indptr[v + 1]):
            u = tails[idx]
            candidate = hv + weights[idx]
            if candidate < values[u]:
                values[u] = candidate
                heapq.heappush(heap, (candidate, u))
    return np.asarray(values)


def bpmx_adjust(h_parent: float, h_child: float, edge_weight: float) -> Tuple[float, float]:
    """One step of bidirectional pathmax across an edge"""
    return max(h_parent, h_child - edge_weight), max(h_child, h_parent - edge_weight)


class CdhHeuristic(HeuristicSpec):
    """HeuristicSpec wrapper over CdhLabels

    Raw CDH bounds are admissible but not always consistent. Given the graph,
    each target vector is lowered to its consistent repair so that A* without
    reopenings stays optimal.
    """
    kind = "cdh"

    def __init__(self, cdh: CdhLabels, mode: str = "strict", graph: Optional[Graph] = None):
        if mode not in CDH_MODES:
            raise ValueError(f"unknown CDH mode {mode!r}, expected one of {CDH_MODES}")
        if graph is not None and graph.num_vertices != cdh.num_vertices:
            raise ValueError(f"graph has {graph.num_vertices} vertices, CDH labels {cdh.num_vertices}")
        self.cdh = cdh
        self.mode = mode
        self.graph = graph

    @property
    def num_vertices(self) -> int:
        return self.cdh.num_vertices

    def to_target(self, t: int) -> np.ndarray:
        h = cdh_to_target(self.cdh, t, self.mode)
        if self.graph is None:
            return h
        return consistent_targets(self.graph, h)

    def describe(self) -> str:
        return f"cdh(r={self.cdh.r}, {self.mode})"


def save_cdh(cdh: CdhLabels, path: Union[str, os.PathLike]) -> Path:
    """Header (magic, P, r, V, directed), side table, then per-vertex index and distance lists"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as handle:
        handle.write(_CDH_HEADER.pack(_CDH_MAGIC, cdh.pool_size, cdh.r, cdh.num_vertices, int(cdh.directed)))
        handle.write(np.ascontiguousarray(cdh.pivot_pivot, dtype="<f8").tobytes())
        directions = [(cdh.stored_out, cdh.values_out)]
        if cdh.directed:
            directions.append((cdh.stored_in, cdh.values_in))
        for stored, values in directions:
            handle.write(np.ascontiguousarray(stored, dtype="<i4").tobytes())
            handle.write(np.ascontiguousarray(values, dtype="<f8").tobytes())
    return path


def load_cdh(path: Union[str, os.PathLike]) -> CdhLabels:
    """Read labels written by save_cdh and re-derive the bound matrices"""
    with open(path, "rb") as handle:
        magic, pool_size, r, num_vertices, directed = _CDH_HEADER.unpack(handle.read(_CDH_HEADER.size))
        if magic != _CDH_MAGIC:
            raise ValueError(f"{path} is not a CDH cache file")
        pivot_pivot = np.frombuffer(handle.read(8 * pool_size * pool_size), dtype="<f8")
        pivot_pivot = pivot_pivot.reshape(pool_size, pool_size).astype(np.float64)

        def read_direction():
            count = num_vertices * r
            stored = np.frombuffer(handle.read(4 * count), dtype="<i4").reshape(num_vertices, r).astype(np.int64)
            values = np.frombuffer(handle.read(8 * count), dtype="<f8").reshape(num_vertices, r).astype(np.float64)
            return stored, values

        stored_out, values_out = read_direction()
        stored_in, values_in = read_direction() if directed else (stored_out, values_out)

    cdh = CdhLabels(pool_size, r, bool(directed), stored_out, values_out, stored_in, values_in, pivot_pivot)
    cdh.bounds = _derive_bounds(cdh)
    return cdh
