"""
Admissible landmark heuristics: ALT on a pool subset, compressed (deployed
selector) labels and the pointwise hybrid.

Every heuristic exposes ``value(u, t)`` and ``to_target(t)``; the latter returns
h(v, t) for all v at once so a search binds its target in one vectorized pass.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from landmarks.labels import SENTINEL, LabelTable

logger = logging.getLogger(__name__)


def masked_difference(minuend: np.ndarray, subtrahend: np.ndarray) -> np.ndarray:
    """minuend - subtrahend in float64; terms touching SENTINEL become -inf"""
    mask = (minuend == SENTINEL) | (subtrahend == SENTINEL)
    diff = np.asarray(minuend, dtype=np.float64) - np.asarray(subtrahend, dtype=np.float64)
    if np.ndim(diff) == 0:
        return np.float64(-np.inf) if mask else diff
    diff[mask] = -np.inf
    return diff


def _max_or_zero(terms: np.ndarray, axis: int = 0) -> np.ndarray:
    """Max over axis, floored at 0 (an empty or all-masked max is 0)"""
    if terms.shape[axis] == 0:
        shape = list(terms.shape)
        del shape[axis]
        return np.zeros(shape, dtype=np.float64)
    return np.maximum(terms.max(axis=axis), 0.0)


def _as_indices(subset: Optional[Sequence[int]], size: int) -> np.ndarray:
    if subset is None:
        return np.arange(size, dtype=np.int64)
    indices = np.asarray(subset, dtype=np.int64).reshape(-1)
    if len(indices) and (indices.min() < 0 or indices.max() >= size):
        raise ValueError(f"subset index outside [0, {size})")
    return indices


def h_alt(labels: LabelTable, subset_fwd: Sequence[int], subset_bwd: Sequence[int], u: int, t: int) -> float:
    """max(0, d_out[k][t] - d_out[k][u] over subset_fwd, d_in[k][u] - d_in[k][t] over subset_bwd)"""
    fwd = _as_indices(subset_fwd, labels.k0)
    bwd = _as_indices(subset_bwd, labels.k0)
    terms = np.concatenate([
        masked_difference(labels.d_out[fwd, t], labels.d_out[fwd, u]),
        masked_difference(labels.d_in[bwd, u], labels.d_in[bwd, t]),
    ])
    return float(_max_or_zero(terms))


def h_compressed(y_fwd: np.ndarray, y_bwd: np.ndarray, u: int, t: int) -> float:
    """max(0, y_bwd[u] - y_bwd[t], y_fwd[t] - y_fwd[u]) over compressed dimensions"""
    terms = np.concatenate([
        masked_difference(y_bwd[u], y_bwd[t]),
        masked_difference(y_fwd[t], y_fwd[u]),
    ])
    return float(_max_or_zero(terms))


def h_hybrid(spec_a: "HeuristicSpec", spec_b: "HeuristicSpec", u: int, t: int) -> float:
    """Pointwise max of two admissible heuristics"""
    return max(spec_a.value(u, t), spec_b.value(u, t))


class HeuristicSpec:
    """Base class: an admissible estimate h(u, t) of d(u, t)"""
    kind = "base"

    def value(self, u: int, t: int) -> float:
        """Heuristic value for one pair"""
        return float(self.to_target(t)[u])

    def to_target(self, t: int) -> np.ndarray:
        """h(v, t) for every vertex v"""
        raise NotImplementedError

    def describe(self) -> str:
        return self.kind


class ZeroHeuristic(HeuristicSpec):
    """h = 0; A* degenerates to Dijkstra"""
    kind = "zero"

    def __init__(self, num_vertices: int):
        self.num_vertices = num_vertices

    def value(self, u: int, t: int) -> float:
        return 0.0

    def to_target(self, t: int) -> np.ndarray:
        return np.zeros(self.num_vertices, dtype=np.float64)


class AltHeuristic(HeuristicSpec):
    """ALT over a subset of pool landmarks"""
    kind = "alt_subset"

    def __init__(self, labels: LabelTable, subset_fwd: Optional[Sequence[int]] = None,
                 subset_bwd: Optional[Sequence[int]] = None):
        """Subsets default to the full pool; subset_bwd defaults to subset_fwd"""
        self.labels = labels
        self.subset_fwd = _as_indices(subset_fwd, labels.k0)
        self.subset_bwd = self.subset_fwd if subset_bwd is None else _as_indices(subset_bwd, labels.k0)
        self._rows_fwd = labels.d_out[self.subset_fwd]
        self._rows_bwd = labels.d_in[self.subset_bwd]

    @property
    def num_vertices(self) -> int:
        return self.labels.num_vertices

    def value(self, u: int, t: int) -> float:
        return h_alt(self.labels, self.subset_fwd, self.subset_bwd, u, t)

    def to_target(self, t: int) -> np.ndarray:
        fwd = masked_difference(self._rows_fwd[:, t:t + 1], self._rows_fwd)
        bwd = masked_difference(self._rows_bwd, self._rows_bwd[:, t:t + 1])
        return _max_or_zero(np.concatenate([fwd, bwd], axis=0), axis=0)

    def describe(self) -> str:
        return f"alt(K={len(self.subset_fwd)})"


@dataclass(eq=False)
class CompressedLabels:
    """Per-vertex deployed labels: y_fwd is V x m_fwd, y_bwd is V x m_bwd"""
    y_fwd: np.ndarray
    y_bwd: np.ndarray
    directed: bool
    selected_fwd: Optional[np.ndarray] = None
    selected_bwd: Optional[np.ndarray] = None

    @property
    def m(self) -> int:
        """Stored floats per vertex"""
        if not self.directed:
            return self.y_fwd.shape[1]
        return self.y_fwd.shape[1] + self.y_bwd.shape[1]

    @property
    def num_vertices(self) -> int:
        return self.y_fwd.shape[0]

    def narrowed(self, dtype: Union[str, np.dtype] = np.float32) -> "CompressedLabels":
        """Copy stored at the deployment precision"""
        dtype = np.dtype(dtype)
        if dtype == self.y_fwd.dtype:
            return self
        y_fwd = self.y_fwd.astype(dtype)
        y_bwd = y_fwd if self.y_bwd is self.y_fwd else self.y_bwd.astype(dtype)
        return CompressedLabels(y_fwd, y_bwd, self.directed, self.selected_fwd, self.selected_bwd)

    def bytes_per_vertex(self) -> int:
        return self.m * self.y_fwd.dtype.itemsize


class CompressedHeuristic(HeuristicSpec):
    """Heuristic over compressed (deployed AAC) labels"""
    kind = "aac_deployed"

    def __init__(self, labels: CompressedLabels):
        self.labels = labels

    @property
    def num_vertices(self) -> int:
        return self.labels.num_vertices

    def value(self, u: int, t: int) -> float:
        return h_compressed(self.labels.y_fwd, self.labels.y_bwd, u, t)

    def to_target(self, t: int) -> np.ndarray:
        y_fwd, y_bwd = self.labels.y_fwd, self.labels.y_bwd
        fwd = masked_difference(y_fwd[t:t + 1, :], y_fwd)
        bwd = masked_difference(y_bwd, y_bwd[t:t + 1, :])
        return _max_or_zero(np.concatenate([bwd, fwd], axis=1), axis=1)

    def describe(self) -> str:
        return f"aac(m={self.labels.m})"


class HybridHeuristic(HeuristicSpec):
    """max of two admissible heuristics"""
    kind = "hybrid_max"

    def __init__(self, spec_a: HeuristicSpec, spec_b: HeuristicSpec):
        self.spec_a = spec_a
        self.spec_b = spec_b

    def value(self, u: int, t: int) -> float:
        return h_hybrid(self.spec_a, self.spec_b, u, t)

    def to_target(self, t: int) -> np.ndarray:
        return np.maximum(self.spec_a.to_target(t), self.spec_b.to_target(t))

    def describe(self) -> str:
        return f"hybrid({self.spec_a.describe()}, {self.spec_b.describe()})"
