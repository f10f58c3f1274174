"""
Matched-memory benchmark cells.

A cell is one (graph, method, budget, seed). Every method at a given seed runs
on the same QuerySet and the same Dijkstra baselines; deployed labels are
narrowed to the configured storage dtype before evaluation.
"""

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from bench.budget import BudgetSpec
from bench.manifest import MethodSpec
from bench.queries import QuerySet, sample_queries
from graphs.graph import ComponentReport, Graph, components
from heuristics.alt import AltHeuristic, CompressedHeuristic, HeuristicSpec, HybridHeuristic, ZeroHeuristic
from heuristics.cdh import CdhHeuristic, build_cdh
from landmarks.labels import LabelTable, build_labels_cached
from landmarks.pool import LandmarkPool
from landmarks.selection import (canonical_start_vertex, fps_random_restart, fps_select, greedy_max_oracle,
                                 random_subset)
from models.selector import deploy
from models.trainer import TrainConfig, train
from search.astar import EXPANSION_CONVENTION, SearchResult, dijkstra_search
from search.audit import AuditRecord, audit, records_to_frame, reduction_pct, summarize_audit
from utils.errors import LandmarkError
from utils.io import write_commented_csv
from utils.logging_setup import progress_enabled

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = [
    "graph", "method", "label", "budget", "seed", "queries", "mean_expansions",
    "mean_dijkstra_expansions", "reduction_pct", "violations", "suboptimal",
    "query_fingerprint", "params", "error",
]


@dataclass
class BenchSettings:
    """Cell-level knobs shared by every method"""
    label_dtype: str = "float32"
    k0_multiplier: int = 4
    cdh_pool_size: int = 64
    fps_restarts: int = 10
    validation_count: int = 100
    audit_rel_tol: float = 1e-9
    narrowed_audit_rel_tol: float = 1e-6
    cache_dir: Optional[str] = None
    train: TrainConfig = field(default_factory=TrainConfig)

    @property
    def rel_tol(self) -> float:
        return self.audit_rel_tol if self.label_dtype == "float64" else self.narrowed_audit_rel_tol


@dataclass
class BenchRecord:
    """Summary and per-query rows of one cell"""
    graph_id: str
    method: str
    label: str
    budget: int
    seed: int
    query_fingerprint: str
    mean_expansions: float = float("nan")
    mean_dijkstra_expansions: float = float("nan")
    reduction_pct: float = float("nan")
    violations: int = 0
    suboptimal: int = 0
    params: str = ""
    error: Optional[str] = None
    rows: List[AuditRecord] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.error is None

    def summary_row(self) -> Dict[str, object]:
        return {
            "graph": self.graph_id, "method": self.method, "label": self.label, "budget": self.budget,
            "seed": self.seed, "queries": len(self.rows), "mean_expansions": self.mean_expansions,
            "mean_dijkstra_expansions": self.mean_dijkstra_expansions, "reduction_pct": self.reduction_pct,
            "violations": self.violations, "suboptimal": self.suboptimal,
            "query_fingerprint": self.query_fingerprint, "params": self.params, "error": self.error or "",
        }

    def rows_frame(self) -> pd.DataFrame:
        frame = records_to_frame(self.rows)
        frame.insert(0, "seed", self.seed)
        frame.insert(0, "budget", self.budget)
        frame.insert(0, "label", self.label)
        frame.insert(0, "method", self.method)
        frame.insert(0, "graph", self.graph_id)
        return frame


class BenchWorkspace:
    """Per-graph caches: components, FPS pools, label tables and Dijkstra baselines"""

    def __init__(self, graph: Graph, settings: Optional[BenchSettings] = None):
        """Initialize workspace for one graph"""
        self.graph = graph
        self.settings = settings or BenchSettings()
        self.report: ComponentReport = components(graph)
        self.start_vertex = canonical_start_vertex(graph, self.report)
        self._pools: Dict[int, LandmarkPool] = {}
        self._labels: Dict[Tuple[int, ...], LabelTable] = {}
        self._baselines: Dict[str, List[SearchResult]] = {}

    @property
    def component_size(self) -> int:
        return len(self.report.designated)

    def fps_pool(self, k: int) -> LandmarkPool:
        """FPS pool of size k from the canonical start; longer pools serve shorter prefixes"""
        for size, pool in self._pools.items():
            if size >= k:
                return pool.prefix(k) if size > k else pool
        pool = fps_select(self.graph, k, self.start_vertex, self.report)
        self._pools[k] = pool
        return pool

    def labels(self, pool: LandmarkPool) -> LabelTable:
        key = tuple(pool.landmark_ids)
        if key not in self._labels:
            self._labels[key] = build_labels_cached(self.graph, pool, self.settings.cache_dir, self.report)
        return self._labels[key]

    def deployed(self, table: LabelTable) -> LabelTable:
        return table.narrowed(self.settings.label_dtype)

    def baselines(self, queries: QuerySet) -> List[SearchResult]:
        key = queries.fingerprint
        if key not in self._baselines:
            self._baselines[key] = [dijkstra_search(self.graph, s, t) for s, t in queries]
        return self._baselines[key]


def _train_config(settings: BenchSettings, method: MethodSpec, seed: int) -> TrainConfig:
    base = settings.train
    overrides = {"seed": seed}
    for name in ("init", "epochs", "lambda_cov"):
        value = getattr(method, name)
        if value is not None:
            overrides[name] = value
    values = {name: getattr(base, name) for name in base.__dataclass_fields__}
    values.update(overrides)
    return TrainConfig(**values)


def _aac_heuristic(workspace: BenchWorkspace, method: MethodSpec, m: int, seed: int) -> Tuple[HeuristicSpec, str]:
    k0 = method.k0 or workspace.settings.k0_multiplier * m
    k0 = min(k0, workspace.component_size)
    labels = workspace.labels(workspace.fps_pool(k0))
    config = _train_config(workspace.settings, method, seed)
    selector, _ = train(labels, m, config)
    deployed = deploy(selector, labels).narrowed(workspace.settings.label_dtype)
    params = f"K0={k0} m={m} init={config.init} epochs={config.epochs} lambda_cov={config.lambda_cov} " \
             f"unique_ratio={selector.unique_ratio():.3f}"
    return CompressedHeuristic(deployed), params


def _alt_on(workspace: BenchWorkspace, pool: LandmarkPool) -> AltHeuristic:
    return AltHeuristic(workspace.deployed(workspace.labels(pool)))


def build_heuristic(workspace: BenchWorkspace, method: MethodSpec, budget: BudgetSpec, queries: QuerySet,
                    seed: int) -> Tuple[HeuristicSpec, bool, str]:
    """Heuristic for one method at a budget; returns (heuristic, bpmx, params)"""
    name = method.name
    settings = workspace.settings
    k = budget.alt_k

    if name == "zero":
        return ZeroHeuristic(workspace.graph.num_vertices), False, ""

    if name in ("alt", "fps"):
        return _alt_on(workspace, workspace.fps_pool(k)), False, f"K={k}"

    if name in ("first_m", "random_subset", "greedy_max"):
        k0 = min(method.k0 or settings.k0_multiplier * budget.aac_m, workspace.component_size)
        pool = workspace.fps_pool(k0)
        labels = workspace.deployed(workspace.labels(pool))
        if name == "first_m":
            indices = np.arange(k)
        elif name == "random_subset":
            indices = labels.indices_of(random_subset(pool, k, seed).landmark_ids)
        else:
            indices = labels.indices_of(greedy_max_oracle(labels, k, list(queries)).landmark_ids)
        return AltHeuristic(labels, indices), False, f"K0={k0} K={k} subset={indices.tolist()}"

    if name == "fps_rr":
        validation = sample_queries(workspace.graph, settings.validation_count, "uniform", seed + 1, workspace.report)
        restarts = method.restarts or settings.fps_restarts
        pool = fps_random_restart(workspace.graph, k, restarts, list(validation), seed, report=workspace.report)
        return _alt_on(workspace, pool), False, f"K={k} restarts={restarts} start={pool.start_vertex}"

    if name == "aac":
        heuristic, params = _aac_heuristic(workspace, method, budget.aac_m, seed)
        return heuristic, False, params

    if name in ("cdh", "cdh_sub", "cdh_sub_bpmx"):
        pool_size = min(method.k0 or settings.cdh_pool_size, workspace.component_size)
        labels = workspace.deployed(workspace.labels(workspace.fps_pool(pool_size)))
        r = min(budget.cdh_r, pool_size)
        cdh = build_cdh(labels, r)
        mode = "strict" if name == "cdh" else "substitution"
        return CdhHeuristic(cdh, mode, workspace.graph), name == "cdh_sub_bpmx", f"P={pool_size} r={r} mode={mode}"

    if name == "hybrid":
        half = budget.half()
        aac, aac_params = _aac_heuristic(workspace, method, half.aac_m, seed)
        alt = _alt_on(workspace, workspace.fps_pool(half.alt_k))
        return HybridHeuristic(aac, alt), False, f"{aac_params} + ALT K={half.alt_k}"

    raise ValueError(f"unknown method {name!r}")


def run_cell(workspace: BenchWorkspace, method: MethodSpec, budget: BudgetSpec, queries: QuerySet,
             seed: int) -> BenchRecord:
    """pool -> labels -> select/train -> deploy -> A* per query -> audit"""
    graph = workspace.graph
    record = BenchRecord(graph.name, method.name, method.display_name, budget.bytes_per_vertex, seed,
                         queries.fingerprint)
    try:
        heuristic, bpmx, params = build_heuristic(workspace, method, budget, queries, seed)
        record.params = params
        rows = audit(graph, list(queries), heuristic, bpmx=bpmx, rel_tol=workspace.settings.rel_tol,
                     baselines=workspace.baselines(queries))
    except (LandmarkError, ValueError, RuntimeError) as e:
        logger.exception(f"Cell {method.display_name} B={budget.bytes_per_vertex} seed={seed} failed")
        record.error = str(e)
        return record

    summary = summarize_audit(rows)
    record.rows = rows
    record.mean_expansions = summary["mean_expansions"]
    record.mean_dijkstra_expansions = summary["mean_dijkstra_expansions"]
    record.reduction_pct = summary["reduction_pct"]
    record.violations = summary["violations"]
    record.suboptimal = summary["suboptimal"]
    logger.info(f"{graph.name} {method.display_name} B={budget.bytes_per_vertex} seed={seed}: "
                f"reduction {record.reduction_pct:.2f}%, violations {record.violations}, "
                f"suboptimal {record.suboptimal}")
    return record


def first_m_pool_arm(workspace: BenchWorkspace, k0: int, m: int, queries: QuerySet, seed: int = 0) -> BenchRecord:
    """ALT on the first K landmarks of the K0 FPS pool (K = m, or m/2 when directed)"""
    if m > k0:
        raise ValueError(f"m={m} exceeds K0={k0}")
    budget = BudgetSpec(4 * m, workspace.graph.directed)
    return run_cell(workspace, MethodSpec(name="first_m", k0=k0), budget, queries, seed)


def _run_seed_cells(workspace: BenchWorkspace, methods: Sequence[MethodSpec], budgets: Sequence[BudgetSpec],
                    queries: QuerySet, seed: int) -> List[BenchRecord]:
    return [run_cell(workspace, method, budget, queries, seed) for budget in budgets for method in methods]


def run_sweep(workspace: BenchWorkspace, methods: Sequence[MethodSpec], budgets: Sequence[BudgetSpec],
              seeds: Sequence[int], query_count: int, query_mode: str = "uniform",
              query_seed: Optional[int] = None, n_jobs: int = 1, **query_kwargs) -> List[BenchRecord]:
    """All (budget, method) cells for every seed; order is seed, budget, method"""
    query_sets = {
        seed: sample_queries(workspace.graph, query_count, query_mode,
                             seed if query_seed is None else query_seed, workspace.report, **query_kwargs)
        for seed in seeds
    }
    iterator = tqdm(seeds, desc="seeds", disable=not progress_enabled() or n_jobs != 1)
    results = Parallel(n_jobs=n_jobs)(
        delayed(_run_seed_cells)(workspace, methods, budgets, query_sets[seed], seed) for seed in iterator
    )
    records = [record for chunk in results for record in chunk]
    check_shared_queries(records)
    return records


def check_shared_queries(records: Sequence[BenchRecord]) -> None:
    """Every method at the same (graph, seed) must have consumed the same QuerySet"""
    seen: Dict[Tuple[str, int], str] = {}
    for record in records:
        key = (record.graph_id, record.seed)
        if seen.setdefault(key, record.query_fingerprint) != record.query_fingerprint:
            raise RuntimeError(f"cells at {key} used different query sets")


def records_summary_frame(records: Sequence[BenchRecord]) -> pd.DataFrame:
    return pd.DataFrame([r.summary_row() for r in records], columns=SUMMARY_COLUMNS)


def records_query_frame(records: Sequence[BenchRecord]) -> pd.DataFrame:
    frames = [r.rows_frame() for r in records if r.rows]
    if not frames:
        return pd.DataFrame()
    return pd.concat(frames, ignore_index=True)


def write_bench_csvs(records: Sequence[BenchRecord], output_dir: Union[str, os.PathLike],
                     header_lines: Sequence[str] = ()) -> Tuple[Path, Path]:
    """cells.csv (one summary row per cell) and queries.csv (per-query rows)"""
    output_dir = Path(output_dir)
    lines = list(header_lines) + [f"# {EXPANSION_CONVENTION}"]
    cells = write_commented_csv(records_summary_frame(records), output_dir / "cells.csv", lines)
    queries = write_commented_csv(records_query_frame(records), output_dir / "queries.csv", lines)
    return cells, queries


def mean_reduction(records: Sequence[BenchRecord]) -> float:
    """Reduction of the pooled mean expansions over several cells"""
    ok = [r for r in records if r.ok]
    if not ok:
        return float("nan")
    return reduction_pct(float(np.mean([r.mean_expansions for r in ok])),
                         float(np.mean([r.mean_dijkstra_expansions for r in ok])))
