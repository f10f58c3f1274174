"""
Admissibility and path-optimality audit.

For each query the method's A* result is compared with Dijkstra, and h(v, t)
is checked against the exact d(v, t) on every vertex of the graph (small
graphs) or of the Dijkstra tree of the query.
"""

import logging
import os
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from graphs.graph import Graph
from heuristics.alt import HeuristicSpec
from landmarks.labels import SENTINEL, dijkstra_sssp
from search.astar import EXPANSION_CONVENTION, SearchResult, astar, dijkstra_search
from utils.io import write_commented_csv
from utils.logging_setup import progress_enabled

logger = logging.getLogger(__name__)

SMALL_GRAPH_VERTICES = 200
SUBOPTIMAL_REL_TOL = 1e-9

AUDIT_COLUMNS = [
    "query_id", "source", "target", "dijkstra_cost", "method_cost",
    "method_expansions", "dijkstra_expansions", "heuristic_violations",
    "suboptimal", "checked_vertices",
]


@dataclass
class AuditRecord:
    """Per-query audit row"""
    query_id: int
    source: int
    target: int
    dijkstra_cost: float
    method_cost: float
    method_expansions: int
    dijkstra_expansions: int
    heuristic_violations: int
    suboptimal: bool
    checked_vertices: int

    def __post_init__(self):
        self.suboptimal = bool(self.method_cost > self.dijkstra_cost * (1.0 + SUBOPTIMAL_REL_TOL))


def count_violations(h: np.ndarray, exact: np.ndarray, vertices: np.ndarray, rel_tol: float = 1e-9) -> int:
    """Vertices where h exceeds the exact distance by more than rel_tol times the distance scale to t"""
    reachable = exact[exact != SENTINEL]
    # label rounding error grows with the largest distance, not with d(v, t)
    scale = max(float(reachable.max()), 1.0) if len(reachable) else 1.0
    exact_v = exact[vertices]
    finite = exact_v != SENTINEL
    d = exact_v[finite]
    hv = np.asarray(h, dtype=np.float64)[vertices][finite]
    return int(np.count_nonzero(hv > d + rel_tol * scale))


def audit_vertices(graph: Graph, s: int, t: int, exact_to_t: np.ndarray) -> np.ndarray:
    """All vertices on small graphs, else the Dijkstra tree {v : d(s, v) <= d(s, t)}"""
    if graph.num_vertices <= SMALL_GRAPH_VERTICES:
        return np.arange(graph.num_vertices)
    from_s = dijkstra_sssp(graph, s)
    if from_s[t] == SENTINEL:
        return np.flatnonzero(from_s != SENTINEL)
    return np.flatnonzero(from_s <= from_s[t])


def audit_query(graph: Graph, query_id: int, s: int, t: int, heuristic: HeuristicSpec,
                bpmx: bool = False, rel_tol: float = 1e-9,
                baseline: Optional[SearchResult] = None) -> Tuple[AuditRecord, SearchResult]:
    """Audit one query; returns the record and the method's search result"""
    baseline = baseline or dijkstra_search(graph, s, t)
    result = astar(graph, s, t, heuristic, bpmx=bpmx)

    exact_to_t = dijkstra_sssp(graph, t, reversed=True)
    vertices = audit_vertices(graph, s, t, exact_to_t)
    violations = count_violations(heuristic.to_target(t), exact_to_t, vertices, rel_tol)

    record = AuditRecord(
        query_id=int(query_id),
        source=int(s),
        target=int(t),
        dijkstra_cost=baseline.cost,
        method_cost=result.cost,
        method_expansions=result.expansions,
        dijkstra_expansions=baseline.expansions,
        heuristic_violations=violations,
        suboptimal=False,
        checked_vertices=len(vertices),
    )
    if record.heuristic_violations:
        logger.warning(f"Query {query_id} ({s}->{t}): {violations} admissibility violation(s) "
                       f"for {heuristic.describe()}")
    if record.suboptimal:
        logger.warning(f"Query {query_id} ({s}->{t}): suboptimal cost {result.cost} > {baseline.cost}")
    return record, result


def audit(graph: Graph, queries: Iterable[Tuple[int, int]], heuristic: HeuristicSpec,
          bpmx: bool = False, rel_tol: float = 1e-9,
          baselines: Optional[Sequence[SearchResult]] = None) -> List[AuditRecord]:
    """Audit every query against Dijkstra and the exact distances"""
    queries = list(queries)
    records = []
    iterator = tqdm(enumerate(queries), total=len(queries), desc=f"audit {heuristic.describe()}",
                    disable=not progress_enabled(), leave=False)
    for i, (s, t) in iterator:
        baseline = baselines[i] if baselines is not None else None
        record, _ = audit_query(graph, i, s, t, heuristic, bpmx, rel_tol, baseline)
        records.append(record)
    return records


def records_to_frame(records: Sequence[AuditRecord]) -> pd.DataFrame:
    """Audit rows as a DataFrame with the fixed column order"""
    return pd.DataFrame([asdict(r) for r in records], columns=AUDIT_COLUMNS)


def summarize_audit(records: Sequence[AuditRecord]) -> Dict[str, float]:
    """Totals and mean expansions over an audit"""
    if not records:
        return {"queries": 0, "violations": 0, "suboptimal": 0,
                "mean_expansions": 0.0, "mean_dijkstra_expansions": 0.0, "reduction_pct": 0.0}
    frame = records_to_frame(records)
    mean_method = float(frame["method_expansions"].mean())
    mean_dijkstra = float(frame["dijkstra_expansions"].mean())
    return {
        "queries": len(frame),
        "violations": int(frame["heuristic_violations"].sum()),
        "suboptimal": int(frame["suboptimal"].sum()),
        "mean_expansions": mean_method,
        "mean_dijkstra_expansions": mean_dijkstra,
        "reduction_pct": reduction_pct(mean_method, mean_dijkstra),
    }


def reduction_pct(method_expansions: float, dijkstra_expansions: float) -> float:
    """100 * (1 - method / dijkstra)"""
    if dijkstra_expansions <= 0:
        return 0.0
    return 100.0 * (1.0 - method_expansions / dijkstra_expansions)


def write_audit_csv(records: Sequence[AuditRecord], path: Union[str, os.PathLike],
                    header_lines: Sequence[str] = ()) -> Path:
    """Per-query audit CSV with the expansion convention in the header"""
    lines = list(header_lines) + [f"# {EXPANSION_CONVENTION}"]
    return write_commented_csv(records_to_frame(records), path, lines)
