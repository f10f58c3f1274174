import logging
from typing import List

import numpy as np
import pandas as pd

from analysis.significance import (PairedSamples, bh_fdr, combine_fisher, combine_stouffer, tost_paired,
                                   wilcoxon_signed_rank)
from utils.errors import StatsInputError

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = [
    "graph", "budget", "method_a", "method_b", "seeds", "fisher_p", "stouffer_p", "median_p",
    "fdr_flag", "tost_p", "tost_equivalent", "mean_diff",
]

KEY_COLUMNS = ["graph", "budget", "seed", "query_id"]


def _reduction(frame: pd.DataFrame) -> float:
    dijkstra = frame["dijkstra_expansions"].mean()
    return 100.0 * (1.0 - frame["method_expansions"].mean() / dijkstra) if dijkstra > 0 else 0.0


def _cell_row(graph, budget, method_a: str, method_b: str, a: pd.DataFrame, b: pd.DataFrame,
              delta: float, alpha: float) -> dict:
    paired = a.merge(b, on=KEY_COLUMNS, suffixes=("_a", "_b"))
    p_values, directions, reduction_diffs = [], [], []
    for seed, group in paired.groupby("seed", sort=True):
        samples = PairedSamples(group["method_expansions_a"], group["method_expansions_b"])
        try:
            result = wilcoxon_signed_rank(samples)
        except StatsInputError as e:
            logger.warning(f"{graph} B={budget} seed={seed}: skipping Wilcoxon ({e})")
            continue
        p_values.append(result.p_value)
        directions.append(result.direction)

        seed_a = a[a["seed"] == seed]
        seed_b = b[b["seed"] == seed]
        reduction_diffs.append(_reduction(seed_a) - _reduction(seed_b))

    row = {"graph": graph, "budget": budget, "method_a": method_a, "method_b": method_b,
           "seeds": len(p_values), "fisher_p": np.nan, "stouffer_p": np.nan, "median_p": np.nan,
           "tost_p": np.nan, "tost_equivalent": False,
           "mean_diff": float(np.mean(reduction_diffs)) if reduction_diffs else np.nan}
    if p_values:
        row["fisher_p"] = combine_fisher(p_values).p_value
        row["stouffer_p"] = combine_stouffer(p_values, directions).p_value
        row["median_p"] = float(np.median(p_values))
    if len(reduction_diffs) >= 2:
        tost = tost_paired(reduction_diffs, delta, alpha)
        row["tost_p"] = tost.p_value
        row["tost_equivalent"] = bool(tost.equivalent)
    return row


def summarize_pairs(queries: pd.DataFrame, method_a: str, method_b: str, q: float = 0.05,
                    delta: float = 1.0, alpha: float = 0.05) -> pd.DataFrame:
    """Per (graph, budget) comparison of two labelled arms from a per-query bench table"""
    for name in (method_a, method_b):
        if name not in set(queries["label"]):
            raise StatsInputError(f"method {name!r} not present in the bench results")

    rows: List[dict] = []
    a_all = queries[queries["label"] == method_a]
    b_all = queries[queries["label"] == method_b]
    for (graph, budget), a in a_all.groupby(["graph", "budget"], sort=True):
        b = b_all[(b_all["graph"] == graph) & (b_all["budget"] == budget)]
        if b.empty:
            logger.warning(f"{graph} B={budget}: no {method_b} rows to pair with")
            continue
        rows.append(_cell_row(graph, budget, method_a, method_b, a, b, delta, alpha))

    summary = pd.DataFrame(rows, columns=SUMMARY_COLUMNS)
    testable = summary["fisher_p"].notna()
    flags = np.zeros(len(summary), dtype=bool)
    if testable.any():
        flags[testable.to_numpy()] = bh_fdr(summary.loc[testable, "fisher_p"], q)
    summary["fdr_flag"] = flags
    return summary
