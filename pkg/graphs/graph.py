"""
Weighted graph container and connectivity analysis.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, List, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from utils.io import fingerprint_arrays

logger = logging.getLogger(__name__)


class Graph:
    """Immutable weighted graph with dense 0-based vertex ids"""

    def __init__(self, num_vertices: int, sources, targets, weights,
                 directed: bool = True, weight_unit: str = "unitless", name: Optional[str] = None):
        """Validate edges, drop self-loops and build forward/reverse adjacency"""
        if num_vertices < 0:
            raise ValueError(f"num_vertices must be non-negative, got {num_vertices}")

        sources = np.asarray(sources, dtype=np.int64).reshape(-1)
        targets = np.asarray(targets, dtype=np.int64).reshape(-1)
        weights = np.asarray(weights, dtype=np.float64).reshape(-1)
        if not (len(sources) == len(targets) == len(weights)):
            raise ValueError("sources, targets and weights must have equal length")

        if len(sources):
            if sources.min() < 0 or targets.min() < 0 or max(sources.max(), targets.max()) >= num_vertices:
                raise ValueError(f"edge endpoint outside [0, {num_vertices})")
            if not np.all(np.isfinite(weights)) or weights.min() <= 0:
                raise ValueError("edge weights must be finite and strictly positive")

        loops = sources == targets
        if loops.any():
            logger.warning(f"Dropping {int(loops.sum())} self-loop(s)")
            keep = ~loops
            sources, targets, weights = sources[keep], targets[keep], weights[keep]

        self.num_vertices = int(num_vertices)
        self.directed = bool(directed)
        self.weight_unit = weight_unit
        self.name = name or "graph"
        self.sources = sources
        self.targets = targets
        self.weights = weights
        for array in (self.sources, self.targets, self.weights):
            array.flags.writeable = False

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"Graph({self.name!r}, {kind}, V={self.num_vertices}, E={self.num_edges})"

    @property
    def num_edges(self) -> int:
        """Number of stored edges (undirected edges counted once)"""
        return len(self.sources)

    def edges(self) -> Iterator[Tuple[int, int, float]]:
        """Iterate stored edges as (u, v, w)"""
        for u, v, w in zip(self.sources.tolist(), self.targets.tolist(), self.weights.tolist()):
            yield u, v, w

    def _arcs(self, reverse: bool = False) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Traversable arcs; undirected edges appear in both directions"""
        tails, heads, weights = self.sources, self.targets, self.weights
        if not self.directed:
            tails, heads = np.concatenate([tails, heads]), np.concatenate([heads, tails])
            weights = np.concatenate([weights, weights])
        if reverse:
            tails, heads = heads, tails
        return tails, heads, weights

    def _build_matrix(self, reverse: bool) -> sparse.csr_matrix:
        tails, heads, weights = self._arcs(reverse)
        if len(tails):
            # parallel arcs collapse to the cheapest one
            order = np.lexsort((weights, heads, tails))
            tails, heads, weights = tails[order], heads[order], weights[order]
            first = np.ones(len(tails), dtype=bool)
            first[1:] = (tails[1:] != tails[:-1]) | (heads[1:] != heads[:-1])
            tails, heads, weights = tails[first], heads[first], weights[first]
        shape = (self.num_vertices, self.num_vertices)
        return sparse.csr_matrix((weights, (tails, heads)), shape=shape)

    @cached_property
    def forward_matrix(self) -> sparse.csr_matrix:
        """CSR matrix of arc weights, parallel arcs reduced to the minimum"""
        return self._build_matrix(reverse=False)

    @cached_property
    def reverse_matrix(self) -> sparse.csr_matrix:
        """CSR matrix of the transposed graph"""
        if not self.directed:
            return self.forward_matrix
        return self._build_matrix(reverse=True)

    def to_sparse(self, reverse: bool = False) -> sparse.csr_matrix:
        """Get the weight matrix of the graph or its transpose"""
        return self.reverse_matrix if reverse else self.forward_matrix

    def _adjacency(self, reverse: bool) -> List[List[Tuple[int, float]]]:
        tails, heads, weights = self._arcs(reverse)
        adjacency: List[List[Tuple[int, float]]] = [[] for _ in range(self.num_vertices)]
        order = np.argsort(tails, kind="stable")
        for u, v, w in zip(tails[order].tolist(), heads[order].tolist(), weights[order].tolist()):
            adjacency[u].append((v, w))
        return adjacency

    @cached_property
    def out_adjacency(self) -> List[List[Tuple[int, float]]]:
        """Per-vertex outgoing (head, weight) lists, parallel edges kept"""
        return self._adjacency(reverse=False)

    @cached_property
    def degrees(self) -> np.ndarray:
        """Incident edge count per vertex (in + out for directed graphs)"""
        counts = np.bincount(self.sources, minlength=self.num_vertices)
        counts = counts + np.bincount(self.targets, minlength=self.num_vertices)
        return counts.astype(np.int64)

    @cached_property
    def fingerprint(self) -> str:
        """Content hash used to key on-disk caches"""
        return fingerprint_arrays(self.sources, self.targets, self.weights,
                                  extra=f"{self.num_vertices}:{int(self.directed)}")

    def has_edge(self, u: int, v: int) -> bool:
        """Check for a traversable arc u -> v"""
        return any(head == v for head, _ in self.out_adjacency[u])


@dataclass(frozen=True, eq=False)
class ComponentReport:
    """Weak (and, for directed graphs, strong) component structure"""
    component_id: np.ndarray
    largest_weak_component: np.ndarray
    largest_strong_component: Optional[np.ndarray] = None
    strong_component_id: Optional[np.ndarray] = None

    @property
    def num_components(self) -> int:
        """Number of weak components"""
        if len(self.component_id) == 0:
            return 0
        return int(self.component_id.max()) + 1

    @property
    def designated(self) -> np.ndarray:
        """Sorted vertex ids of the component experiments are restricted to"""
        if self.largest_strong_component is not None:
            return self.largest_strong_component
        return self.largest_weak_component

    def contains(self, vertex: int) -> bool:
        """Check membership in the designated component"""
        members = self.designated
        position = np.searchsorted(members, vertex)
        return bool(position < len(members) and members[position] == vertex)


def _largest(labels: np.ndarray) -> np.ndarray:
    """Members of the largest label class; ties go to the class holding the lowest vertex id"""
    if len(labels) == 0:
        return np.empty(0, dtype=np.int64)
    sizes = np.bincount(labels)
    best = sizes.max()
    first_vertex = np.full(len(sizes), len(labels), dtype=np.int64)
    np.minimum.at(first_vertex, labels, np.arange(len(labels)))
    candidates = np.flatnonzero(sizes == best)
    winner = candidates[np.argmin(first_vertex[candidates])]
    return np.flatnonzero(labels == winner).astype(np.int64)


def components(graph: Graph) -> ComponentReport:
    """Compute weak components, and strong components when directed"""
    matrix = graph.forward_matrix
    _, weak = csgraph.connected_components(matrix, directed=True, connection="weak")
    weak = weak.astype(np.int64)
    report_kwargs = {
        "component_id": weak,
        "largest_weak_component": _largest(weak),
    }
    if graph.directed:
        _, strong = csgraph.connected_components(matrix, directed=True, connection="strong")
        strong = strong.astype(np.int64)
        report_kwargs["strong_component_id"] = strong
        report_kwargs["largest_strong_component"] = _largest(strong)

    report = ComponentReport(**report_kwargs)
    logger.debug(f"{graph!r}: {report.num_components} weak component(s), "
                 f"designated component size {len(report.designated)}")
    return report
