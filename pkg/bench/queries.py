"""
Query sampling over the designated component.

- uniform: endpoints i.i.d. uniform over the component
- hotspot: each endpoint comes from the top-degree cluster with probability
  `share`, otherwise uniform; the cluster is the top `fraction` of component
  vertices by degree (at least two, ties to the lowest id)
- powerlaw: endpoint probability proportional to degree ** exponent

Pairs with s == t are redrawn.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, Optional, Tuple

import numpy as np
import pandas as pd

from graphs.graph import ComponentReport, Graph, components
from utils.io import fingerprint_arrays

logger = logging.getLogger(__name__)


class QueryMode(str, Enum):
    UNIFORM = "uniform"
    HOTSPOT = "hotspot"
    POWERLAW = "powerlaw"


@dataclass(eq=False)
class QuerySet:
    """Shared (s, t) pairs for one cell"""
    mode: QueryMode
    pairs: np.ndarray
    seed: int
    metadata: Dict[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[Tuple[int, int]]:
        for s, t in self.pairs.tolist():
            yield s, t

    @property
    def fingerprint(self) -> str:
        return fingerprint_arrays(self.pairs, extra=f"{self.mode.value}:{self.seed}")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"query_id": np.arange(len(self)), "source": self.pairs[:, 0],
                             "target": self.pairs[:, 1]})


def hotspot_cluster(graph: Graph, members: np.ndarray, fraction: float = 0.01) -> np.ndarray:
    """Top ceil(fraction * |C|) component vertices by degree, at least two"""
    size = min(len(members), max(2, math.ceil(fraction * len(members))))
    degrees = graph.degrees[members]
    order = np.argsort(-degrees, kind="stable")
    return np.sort(members[order[:size]])


def _endpoint_sampler(graph: Graph, members: np.ndarray, mode: QueryMode, rng: np.random.Generator,
                      fraction: float, share: float, exponent: float):
    if mode == QueryMode.UNIFORM:
        return lambda count: rng.choice(members, size=count)

    if mode == QueryMode.HOTSPOT:
        cluster = hotspot_cluster(graph, members, fraction)

        def draw(count):
            from_cluster = rng.random(count) < share
            return np.where(from_cluster, rng.choice(cluster, size=count), rng.choice(members, size=count))
        return draw

    weights = graph.degrees[members].astype(np.float64) ** exponent
    probs = weights / weights.sum()
    return lambda count: rng.choice(members, size=count, p=probs)


def sample_queries(graph: Graph, n: int, mode: str = "uniform", seed: int = 42,
                   report: Optional[ComponentReport] = None, fraction: float = 0.01,
                   share: float = 0.9, exponent: float = 1.5) -> QuerySet:
    """n distinct-endpoint pairs from the designated component"""
    if n <= 0:
        raise ValueError(f"query count must be positive, got {n}")
    mode = QueryMode(mode)
    report = report or components(graph)
    members = report.designated
    if len(members) < 2:
        raise ValueError("designated component has fewer than two vertices")

    rng = np.random.default_rng(seed)
    draw = _endpoint_sampler(graph, members, mode, rng, fraction, share, exponent)
    collected = []
    remaining = n
    while remaining > 0:
        sources, targets = draw(remaining), draw(remaining)
        keep = sources != targets
        collected.append(np.stack([sources[keep], targets[keep]], axis=1))
        remaining -= int(keep.sum())
    pairs = np.concatenate(collected, axis=0)[:n].astype(np.int64)

    metadata = {"mode": mode.value}
    if mode == QueryMode.HOTSPOT:
        metadata.update(hotspot_fraction=str(fraction), hotspot_share=str(share))
    elif mode == QueryMode.POWERLAW:
        metadata["powerlaw_exponent"] = str(exponent)
    logger.debug(f"Sampled {n} {mode.value} queries on {graph!r} (seed={seed})")
    return QuerySet(mode, pairs, seed, metadata)
