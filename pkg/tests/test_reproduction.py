"""
Desk-scale SBM runs. Deselected by default; run with `pytest -m slow`.
"""

import numpy as np
import pytest

from bench.budget import BudgetSpec
from bench.drift import drift_diagnostic
from bench.manifest import MethodSpec
from bench.protocol import BenchSettings, BenchWorkspace, mean_reduction, run_sweep
from bench.queries import sample_queries
from graphs.generators import gen_sbm
from heuristics.cdh import CdhHeuristic, build_cdh
from models.trainer import TrainConfig

pytestmark = pytest.mark.slow

SEEDS = [42, 123, 456, 789, 1024]


@pytest.fixture(scope="module")
def workspace():
    graph = gen_sbm(5, 2000, 0.05, 0.001, seed=42)
    return BenchWorkspace(graph, BenchSettings(label_dtype="float32", train=TrainConfig(epochs=200)))


def test_fps_alt_reduction_at_32_bytes(workspace):
    records = run_sweep(workspace, [MethodSpec(name="alt")], [BudgetSpec(32, False)], SEEDS, query_count=100)
    assert all(r.ok and r.violations == 0 and r.suboptimal == 0 for r in records)
    assert mean_reduction(records) == pytest.approx(89.95, abs=3.0)


def test_trained_selector_drifts_below_forced_first_m(workspace):
    table = drift_diagnostic(workspace, k0=64, m=8, epochs_list=[0, 200], seeds=SEEDS, query_count=100,
                             train_config=TrainConfig(epochs=200, init="block_sparse"))
    by_row = table.summary.set_index("row")
    assert by_row.loc["trained@200", "reduction_pct"] <= by_row.loc["forced_first_m", "reduction_pct"]
    assert (table.summary["violations"] == 0).all()


def test_identity_init_stays_at_ceiling(workspace):
    table = drift_diagnostic(workspace, k0=64, m=8, epochs_list=[0, 50, 200], seeds=SEEDS, query_count=100,
                             train_config=TrainConfig(epochs=200, init="identity_first_m"))
    trained = table.summary[table.summary["row"].str.startswith("trained@")]
    assert len(trained) == 3
    assert np.all(np.abs(trained["gap_to_ceiling"]) <= 0.1)


def test_cdh_stays_below_alt_at_matched_memory(workspace):
    methods = [MethodSpec(name=n) for n in ("alt", "cdh", "cdh_sub", "cdh_sub_bpmx")]
    budgets = [BudgetSpec(b, False) for b in (32, 64, 128)]
    records = run_sweep(workspace, methods, budgets, SEEDS[:2], query_count=100)
    assert all(r.ok for r in records), [r.error for r in records if not r.ok]

    for budget in (32, 64, 128):
        alt = mean_reduction([r for r in records if r.budget == budget and r.method == "alt"])
        for name in ("cdh", "cdh_sub", "cdh_sub_bpmx"):
            cdh = mean_reduction([r for r in records if r.budget == budget and r.method == name])
            assert cdh < alt, (budget, name)


def test_substitution_dominates_strict_on_audit_pairs(workspace):
    labels = workspace.labels(workspace.fps_pool(64))
    cdh = build_cdh(labels, BudgetSpec(32, False).cdh_r)
    strict, sub = CdhHeuristic(cdh, "strict"), CdhHeuristic(cdh, "substitution")
    for s, t in sample_queries(workspace.graph, 100, seed=7, report=workspace.report):
        assert np.all(sub.to_target(t) >= strict.to_target(t))
