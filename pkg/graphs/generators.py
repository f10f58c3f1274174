"""
Seeded synthetic graph generators.

Topology comes from networkx, edge weights from numpy's PCG64 Generator seeded
with the same value. Results are bit-reproducible for a fixed seed and fixed
library versions; other generators give the same distributions, not the same bits.
"""

import logging
import os
from typing import List, Tuple

import networkx as nx
import numpy as np

from graphs.graph import Graph
from graphs.parsers import load_graph

logger = logging.getLogger(__name__)


def _sorted_edges(nx_graph: nx.Graph) -> Tuple[np.ndarray, np.ndarray]:
    """Undirected edge list as (min, max) pairs in lexicographic order"""
    pairs: List[Tuple[int, int]] = sorted((min(u, v), max(u, v)) for u, v in nx_graph.edges())
    if not pairs:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    array = np.asarray(pairs, dtype=np.int64)
    return array[:, 0], array[:, 1]


def _uniform_weights(count: int, w_lo: float, w_hi: float, seed: int) -> np.ndarray:
    if w_lo <= 0 or w_hi < w_lo:
        raise ValueError(f"weights need 0 < w_lo <= w_hi, got [{w_lo}, {w_hi}]")
    rng = np.random.default_rng(seed)
    return rng.uniform(w_lo, w_hi, size=count)


def gen_sbm(blocks: int, block_size: int, p_in: float, p_out: float,
            w_lo: float = 1.0, w_hi: float = 10.0, seed: int = 42) -> Graph:
    """Undirected stochastic block model with uniform random weights"""
    if blocks <= 0 or block_size <= 0:
        raise ValueError(f"SBM needs positive blocks and block_size, got {blocks}x{block_size}")
    for label, p in (("p_in", p_in), ("p_out", p_out)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{label} must be a probability, got {p}")

    sizes = [block_size] * blocks
    probs = [[p_in if i == j else p_out for j in range(blocks)] for i in range(blocks)]
    nx_graph = nx.stochastic_block_model(sizes, probs, seed=seed, directed=False, selfloops=False)

    sources, targets = _sorted_edges(nx_graph)
    weights = _uniform_weights(len(sources), w_lo, w_hi, seed)
    graph = Graph(blocks * block_size, sources, targets, weights, directed=False,
                  name=f"sbm{blocks}x{block_size}")
    logger.info(f"Generated {graph!r} (p_in={p_in}, p_out={p_out}, seed={seed})")
    return graph


def gen_ba(n: int, m_attach: int, w_lo: float = 1.0, w_hi: float = 10.0, seed: int = 42) -> Graph:
    """Undirected Barabasi-Albert graph with uniform random weights"""
    if m_attach < 1 or n <= m_attach:
        raise ValueError(f"Barabasi-Albert needs n > m_attach >= 1, got n={n}, m_attach={m_attach}")

    nx_graph = nx.barabasi_albert_graph(n, m_attach, seed=seed)
    sources, targets = _sorted_edges(nx_graph)
    weights = _uniform_weights(len(sources), w_lo, w_hi, seed)
    graph = Graph(n, sources, targets, weights, directed=False, name=f"ba{n}m{m_attach}")
    logger.info(f"Generated {graph!r} (seed={seed})")
    return graph


def gen_path(n: int) -> Graph:
    """Undirected unit-weight path 0-1-...-(n-1)"""
    if n < 2:
        raise ValueError(f"path graph needs n >= 2, got {n}")
    sources = np.arange(n - 1, dtype=np.int64)
    return Graph(n, sources, sources + 1, np.ones(n - 1), directed=False, name=f"path{n}")


def graph_from_source(source: str, seed: int = 42, w_lo: float = 1.0, w_hi: float = 10.0) -> Graph:
    """Build a graph from 'sbm:BxS[:p_in:p_out]', 'ba:N:M', 'path:N' or a file path"""
    kind, _, rest = source.partition(":")
    kind = kind.lower()

    if kind == "sbm":
        parts = rest.split(":")
        try:
            blocks, block_size = (int(x) for x in parts[0].lower().split("x"))
            p_in = float(parts[1]) if len(parts) > 1 else 0.05
            p_out = float(parts[2]) if len(parts) > 2 else 0.001
        except ValueError:
            raise ValueError(f"Bad SBM source {source!r}, expected sbm:BLOCKSxSIZE[:p_in:p_out]")
        return gen_sbm(blocks, block_size, p_in, p_out, w_lo, w_hi, seed)

    if kind == "ba":
        try:
            n, m_attach = (int(x) for x in rest.split(":"))
        except ValueError:
            raise ValueError(f"Bad BA source {source!r}, expected ba:N:M")
        return gen_ba(n, m_attach, w_lo, w_hi, seed)

    if kind == "path":
        try:
            return gen_path(int(rest))
        except ValueError as e:
            raise ValueError(f"Bad path source {source!r}: {e}")

    if kind == "file":
        source = rest
    if os.path.exists(source):
        return load_graph(source)
    raise FileNotFoundError(f"Graph source is neither a generator string nor an existing file: {source}")
