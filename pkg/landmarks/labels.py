"""
Single-source shortest paths and landmark label tables.

Unreachable entries hold SENTINEL exactly. Every mask in the package compares
with ``== SENTINEL``; SENTINEL is a Python float so the comparison also holds
after narrowing a table to float32.
"""

import logging
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from scipy.sparse import csgraph

from graphs.graph import Graph, components
from landmarks.pool import LandmarkPool
from utils.errors import ComponentError
from utils.io import fingerprint_arrays

logger = logging.getLogger(__name__)

SENTINEL = 1e18

_LABEL_MAGIC = b"LMKLBL01"
_LABEL_HEADER = struct.Struct("<8sIQB")


def _check_vertex(graph: Graph, vertex: int, label: str = "source") -> None:
    if not 0 <= int(vertex) < graph.num_vertices:
        raise ValueError(f"{label} {vertex} out of range [0, {graph.num_vertices})")


def _sssp_rows(graph: Graph, sources: Sequence[int], reversed: bool = False) -> np.ndarray:
    """Distance rows for several sources; unreachable entries become SENTINEL"""
    matrix = graph.to_sparse(reverse=reversed)
    indices = np.asarray(sources, dtype=np.int64)
    if len(indices) == 0:
        return np.empty((0, graph.num_vertices), dtype=np.float64)
    rows = csgraph.dijkstra(matrix, directed=True, indices=indices)
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    rows[np.isinf(rows)] = SENTINEL
    return rows


def dijkstra_sssp(graph: Graph, source: int, reversed: bool = False) -> np.ndarray:
    """Exact float64 distances from source (to source on the transposed graph when reversed)"""
    _check_vertex(graph, source)
    return _sssp_rows(graph, [int(source)], reversed=reversed)[0]


@dataclass(eq=False)
class LabelTable:
    """Forward d(l_k, v) and backward d(v, l_k) distance tables for a landmark pool"""
    landmark_ids: np.ndarray
    d_out: np.ndarray
    d_in: np.ndarray
    directed: bool
    sentinel: float = field(default=SENTINEL)

    def __post_init__(self):
        self.landmark_ids = np.asarray(self.landmark_ids, dtype=np.int64)
        for array in (self.landmark_ids, self.d_out, self.d_in):
            array.flags.writeable = False

    @property
    def k0(self) -> int:
        """Number of pool landmarks"""
        return len(self.landmark_ids)

    @property
    def num_vertices(self) -> int:
        """Number of graph vertices covered by each row"""
        return self.d_out.shape[1]

    @property
    def dtype(self) -> np.dtype:
        return self.d_out.dtype

    def take(self, indices: Sequence[int]) -> "LabelTable":
        """Sub-table on the given pool indices, preserving the undirected alias"""
        indices = np.asarray(indices, dtype=np.int64)
        d_out = self.d_out[indices]
        d_in = d_out if not self.directed else self.d_in[indices]
        return LabelTable(self.landmark_ids[indices], d_out, d_in, self.directed, self.sentinel)

    def prefix(self, k: int) -> "LabelTable":
        """Sub-table on the first k pool landmarks"""
        if not 1 <= k <= self.k0:
            raise ValueError(f"prefix length {k} outside [1, {self.k0}]")
        return self.take(np.arange(k))

    def narrowed(self, dtype: Union[str, np.dtype] = np.float32) -> "LabelTable":
        """Copy with the tables cast to dtype (deployment storage)"""
        dtype = np.dtype(dtype)
        if dtype == self.d_out.dtype:
            return self
        d_out = self.d_out.astype(dtype)
        d_in = d_out if not self.directed else self.d_in.astype(dtype)
        return LabelTable(self.landmark_ids, d_out, d_in, self.directed, self.sentinel)

    def finite_vertices(self) -> np.ndarray:
        """Boolean mask of vertices with every label entry finite in both tables"""
        finite = np.all(self.d_out != SENTINEL, axis=0)
        if self.directed:
            finite &= np.all(self.d_in != SENTINEL, axis=0)
        return finite

    def symmetrized(self) -> np.ndarray:
        """max(d(l, v), d(v, l)); SENTINEL dominates the max"""
        if not self.directed:
            return self.d_out
        return np.maximum(self.d_out, self.d_in)

    def indices_of(self, vertex_ids: Sequence[int]) -> np.ndarray:
        """Pool row indices of the given landmark vertex ids"""
        position = {int(v): i for i, v in enumerate(self.landmark_ids.tolist())}
        try:
            return np.asarray([position[int(v)] for v in vertex_ids], dtype=np.int64)
        except KeyError as e:
            raise ValueError(f"vertex {e.args[0]} is not a pool landmark")

    @property
    def fingerprint(self) -> str:
        """Hash of the pool identity"""
        return fingerprint_arrays(self.landmark_ids, extra=f"pool:{int(self.directed)}")


def build_labels(graph: Graph, pool: LandmarkPool, report=None) -> LabelTable:
    """Forward SSSP rows from every pool landmark, plus reverse rows when directed"""
    report = report or components(graph)
    ids = np.asarray(pool.landmark_ids, dtype=np.int64)
    if len(ids) == 0:
        raise ValueError("landmark pool is empty")
    for vertex in ids.tolist():
        _check_vertex(graph, vertex, "landmark")
        if not report.contains(vertex):
            raise ComponentError(f"landmark {vertex} lies outside the designated component")

    d_out = _sssp_rows(graph, ids, reversed=False)
    d_in = _sssp_rows(graph, ids, reversed=True) if graph.directed else d_out
    logger.info(f"Built labels for {len(ids)} landmarks on {graph!r}")
    return LabelTable(ids, d_out, d_in, graph.directed)


def save_labels(table: LabelTable, path: Union[str, os.PathLike]) -> Path:
    """Write header (magic, K0, V, directed) and row-major little-endian float64 tables"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as handle:
        handle.write(_LABEL_HEADER.pack(_LABEL_MAGIC, table.k0, table.num_vertices, int(table.directed)))
        handle.write(table.landmark_ids.astype("<i8").tobytes())
        handle.write(np.ascontiguousarray(table.d_out, dtype="<f8").tobytes())
        if table.directed:
            handle.write(np.ascontiguousarray(table.d_in, dtype="<f8").tobytes())
    return path


def load_labels(path: Union[str, os.PathLike]) -> LabelTable:
    """Read a table written by save_labels"""
    with open(path, "rb") as handle:
        magic, k0, num_vertices, directed = _LABEL_HEADER.unpack(handle.read(_LABEL_HEADER.size))
        if magic != _LABEL_MAGIC:
            raise ValueError(f"{path} is not a label cache file")
        ids = np.frombuffer(handle.read(8 * k0), dtype="<i8").astype(np.int64)
        count = k0 * num_vertices
        d_out = np.frombuffer(handle.read(8 * count), dtype="<f8").reshape(k0, num_vertices).astype(np.float64)
        d_in = d_out
        if directed:
            d_in = np.frombuffer(handle.read(8 * count), dtype="<f8").reshape(k0, num_vertices).astype(np.float64)
    return LabelTable(ids, d_out, d_in, bool(directed))


def label_cache_path(cache_dir: Union[str, os.PathLike], graph: Graph, pool: LandmarkPool) -> Path:
    """Cache file keyed by (graph hash, pool hash)"""
    pool_hash = fingerprint_arrays(np.asarray(pool.landmark_ids, dtype=np.int64))
    return Path(cache_dir) / f"labels-{graph.fingerprint[:16]}-{pool_hash[:16]}.bin"


def build_labels_cached(graph: Graph, pool: LandmarkPool,
                        cache_dir: Optional[Union[str, os.PathLike]] = None, report=None) -> LabelTable:
    """build_labels with an optional on-disk cache"""
    if cache_dir is None:
        return build_labels(graph, pool, report)

    path = label_cache_path(cache_dir, graph, pool)
    if path.exists():
        try:
            table = load_labels(path)
            if table.num_vertices == graph.num_vertices and np.array_equal(table.landmark_ids, pool.landmark_ids):
                logger.debug(f"Label cache hit: {path}")
                return table
        except (OSError, ValueError) as e:
            logger.warning(f"Ignoring unreadable label cache {path}: {e}")

    table = build_labels(graph, pool, report)
    save_labels(table, path)
    return table
