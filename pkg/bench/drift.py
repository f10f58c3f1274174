"""
Training-drift diagnostic: FPS-ALT at K = m against the forced first-m
selector, the K0 = m identity case and a trained selector at each checkpoint.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from bench.queries import sample_queries
from bench.protocol import BenchWorkspace
from heuristics.alt import AltHeuristic, CompressedHeuristic, HeuristicSpec
from landmarks.selection import fps_select
from models.selector import Selector, deploy, init_logits
from models.trainer import TrainConfig, train
from search.audit import audit, summarize_audit

logger = logging.getLogger(__name__)

DRIFT_COLUMNS = [
    "row", "epochs", "mean_expansions", "reduction_pct", "reduction_std",
    "violations", "suboptimal", "unique_ratio", "gap_to_ceiling",
]


@dataclass
class DriftTable:
    summary: pd.DataFrame
    per_seed: pd.DataFrame


def forced_first_m(k0: int, m: int, directed: bool) -> Selector:
    """Noise-free one-hot selector on the first m pool indices (per direction)"""
    return init_logits(k0, m, "identity_first_m", seed=0, directed=directed, boost=1.0, noise=0.0)


def _evaluate(workspace: BenchWorkspace, heuristic: HeuristicSpec, queries) -> dict:
    rows = audit(workspace.graph, list(queries), heuristic, rel_tol=workspace.settings.rel_tol,
                 baselines=workspace.baselines(queries))
    return summarize_audit(rows)


def _deployed_heuristic(workspace: BenchWorkspace, selector: Selector, labels) -> CompressedHeuristic:
    return CompressedHeuristic(deploy(selector, labels).narrowed(workspace.settings.label_dtype))


def drift_diagnostic(workspace: BenchWorkspace, k0: int, m: int, epochs_list: Sequence[int], seeds: Sequence[int],
                     query_count: int = 100, query_mode: str = "uniform",
                     train_config: Optional[TrainConfig] = None) -> DriftTable:
    """Rows fps_alt, forced_first_m, identity_case and trained@epoch, averaged over seeds"""
    graph = workspace.graph
    if k0 < m:
        raise ValueError(f"K0={k0} must be at least m={m}")
    if graph.directed and m % 2:
        raise ValueError(f"directed drift diagnostic needs an even m, got {m}")
    k = m // 2 if graph.directed else m
    epochs_list = sorted(set(int(e) for e in epochs_list))
    base = train_config or TrainConfig()
    max_epochs = max(epochs_list) if epochs_list else base.epochs

    records: List[dict] = []
    for seed in seeds:
        queries = sample_queries(graph, query_count, query_mode, seed, workspace.report)
        config_values = {name: getattr(base, name) for name in base.__dataclass_fields__}
        config_values.update(seed=seed, epochs=max_epochs, checkpoints=tuple(e for e in epochs_list if e > 0))
        config = TrainConfig(**config_values)

        alt_pool = fps_select(graph, k, workspace.start_vertex, workspace.report)
        alt = AltHeuristic(workspace.deployed(workspace.labels(alt_pool)))
        records.append({"row": "fps_alt", "epochs": 0, "seed": seed, "unique_ratio": 1.0,
                        **_evaluate(workspace, alt, queries)})

        labels = workspace.labels(workspace.fps_pool(k0))
        forced = forced_first_m(k0, m, graph.directed)
        records.append({"row": "forced_first_m", "epochs": 0, "seed": seed,
                        "unique_ratio": forced.unique_ratio(),
                        **_evaluate(workspace, _deployed_heuristic(workspace, forced, labels), queries)})

        identity_labels = workspace.labels(workspace.fps_pool(m))
        identity, _ = train(identity_labels, m, config)
        records.append({"row": "identity_case", "epochs": max_epochs, "seed": seed,
                        "unique_ratio": identity.unique_ratio(),
                        **_evaluate(workspace, _deployed_heuristic(workspace, identity, identity_labels), queries)})

        _, report = train(labels, m, config)
        snapshots = dict(report.checkpoints)
        if 0 in epochs_list:
            snapshots[0] = init_logits(k0, m, config.init, seed, graph.directed, config.boost)
        for epoch in epochs_list:
            row = {"row": f"trained@{epoch}", "epochs": epoch, "seed": seed}
            if epoch not in snapshots:
                logger.warning(f"No checkpoint at epoch {epoch} for seed {seed} (diverged={report.diverged})")
                records.append({**row, "unique_ratio": np.nan, "mean_expansions": np.nan, "reduction_pct": np.nan,
                                "violations": 0, "suboptimal": 0})
                continue
            selector = snapshots[epoch]
            records.append({**row, "unique_ratio": selector.unique_ratio(),
                            **_evaluate(workspace, _deployed_heuristic(workspace, selector, labels), queries)})

    per_seed = pd.DataFrame(records)
    summary = _summarize(per_seed)
    ceiling = summary.loc[summary["row"] == "forced_first_m", "mean_expansions"]
    alt_row = summary.loc[summary["row"] == "fps_alt", "mean_expansions"]
    if len(ceiling) and len(alt_row) and float(ceiling.iloc[0]) != float(alt_row.iloc[0]):
        logger.warning("forced first-m expansions differ from FPS-ALT at K=m")
    return DriftTable(summary, per_seed)


def _summarize(per_seed: pd.DataFrame) -> pd.DataFrame:
    grouped = per_seed.groupby(["row", "epochs"], sort=False)
    summary = grouped.agg(
        mean_expansions=("mean_expansions", "mean"),
        reduction_pct=("reduction_pct", "mean"),
        reduction_std=("reduction_pct", "std"),
        violations=("violations", "sum"),
        suboptimal=("suboptimal", "sum"),
        unique_ratio=("unique_ratio", "mean"),
    ).reset_index()
    summary["reduction_std"] = summary["reduction_std"].fillna(0.0)
    ceiling = summary.loc[summary["row"] == "forced_first_m", "reduction_pct"]
    ceiling_value = float(ceiling.iloc[0]) if len(ceiling) else np.nan
    summary["gap_to_ceiling"] = summary["reduction_pct"] - ceiling_value
    return summary[DRIFT_COLUMNS]
