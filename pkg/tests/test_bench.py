import numpy as np
import pytest

from analysis.summary import summarize_pairs
from bench.budget import BudgetSpec
from bench.drift import DRIFT_COLUMNS, drift_diagnostic, forced_first_m
from bench.manifest import ExperimentManifest, MethodSpec
from bench.protocol import (SUMMARY_COLUMNS, BenchRecord, BenchSettings, BenchWorkspace, check_shared_queries,
                            first_m_pool_arm, mean_reduction, run_cell, run_sweep, write_bench_csvs)
from bench.queries import QueryMode, hotspot_cluster, sample_queries
from conftest import random_connected_graph
from graphs.generators import gen_sbm
from graphs.graph import Graph, components
from models.trainer import TrainConfig
from utils.errors import BudgetError, ManifestError
from utils.io import read_commented_csv

MANIFEST = """
[graph]
source = "sbm:3x20:0.5:0.05"
seed = 3

[queries]
count = 12
mode = "hotspot"

[train]
epochs = 2
lambda_cov = 0.01

[run]
budgets = [32, 64]
seeds = [1, 2]
jobs = 2

[[methods]]
name = "alt"

[[methods]]
name = "aac"
label = "aac-identity"
init = "identity_first_m"
"""


@pytest.fixture
def sbm():
    return gen_sbm(3, 20, 0.5, 0.05, seed=3)


@pytest.fixture
def workspace(sbm):
    train = TrainConfig(epochs=2, queries_per_epoch=32, batch_size=32)
    return BenchWorkspace(sbm, BenchSettings(label_dtype="float64", fps_restarts=2, validation_count=10,
                                             train=train))


def test_budget_algebra():
    for b, (m, k_u, k_d, r) in {32: (8, 8, 4, 3), 64: (16, 16, 8, 7), 128: (32, 32, 16, 14)}.items():
        undirected, directed = BudgetSpec(b, False), BudgetSpec(b, True)
        assert (undirected.aac_m, undirected.alt_k, undirected.cdh_r) == (m, k_u, r)
        assert (directed.aac_m, directed.alt_k) == (m, k_d)
    assert BudgetSpec(32, False).half() == BudgetSpec(16, False)


def test_invalid_budgets():
    with pytest.raises(BudgetError):
        BudgetSpec(30, False)
    with pytest.raises(BudgetError):
        BudgetSpec(0, False)
    with pytest.raises(BudgetError):
        BudgetSpec(4, True)
    with pytest.raises(BudgetError):
        BudgetSpec(36, False).half()
    with pytest.raises(BudgetError):
        BudgetSpec(8, False).cdh_r
    # BudgetError is still a ValueError for callers that only know the builtin
    with pytest.raises(ValueError):
        BudgetSpec(6, False)


def test_uniform_queries(sbm):
    report = components(sbm)
    queries = sample_queries(sbm, 200, "uniform", seed=4, report=report)
    assert len(queries) == 200
    assert np.all(queries.pairs[:, 0] != queries.pairs[:, 1])
    assert np.isin(queries.pairs, report.designated).all()
    assert queries.fingerprint == sample_queries(sbm, 200, "uniform", seed=4).fingerprint
    assert queries.fingerprint != sample_queries(sbm, 200, "uniform", seed=5).fingerprint
    assert list(queries.to_frame().columns) == ["query_id", "source", "target"]


def test_hotspot_queries_stay_in_cluster(sbm):
    members = components(sbm).designated
    cluster = hotspot_cluster(sbm, members, 0.01)
    assert len(cluster) == 2

    queries = sample_queries(sbm, 50, "hotspot", seed=1, fraction=0.01, share=1.0)
    assert queries.mode == QueryMode.HOTSPOT
    assert np.isin(queries.pairs, cluster).all()
    assert queries.metadata["hotspot_share"] == "1.0"


def test_powerlaw_queries(sbm):
    queries = sample_queries(sbm, 40, "powerlaw", seed=2, exponent=2.0)
    assert queries.metadata["powerlaw_exponent"] == "2.0"
    assert np.all(queries.pairs[:, 0] != queries.pairs[:, 1])


def test_powerlaw_star_hub_frequency():
    leaves, exponent, count = 10, 1.5, 20000
    star = Graph(leaves + 1, [0] * leaves, list(range(1, leaves + 1)), np.ones(leaves), directed=False)
    pairs = sample_queries(star, count, "powerlaw", seed=4, exponent=exponent).pairs

    hub = leaves ** exponent / (leaves ** exponent + leaves)
    leaf = (1.0 - hub) / leaves
    distinct = 1.0 - hub ** 2 - leaves * leaf ** 2
    p = 2.0 * hub * (1.0 - hub) / distinct
    hits = int(np.sum((pairs[:, 0] == 0) | (pairs[:, 1] == 0)))
    assert abs(hits - count * p) <= 3.0 * np.sqrt(count * p * (1.0 - p))


def test_query_errors(sbm):
    with pytest.raises(ValueError):
        sample_queries(sbm, 0)
    with pytest.raises(ValueError):
        sample_queries(sbm, 5, "zipf")
    with pytest.raises(ValueError):
        sample_queries(Graph(3, [], [], [], directed=False), 5)


def test_manifest_parsing(tmp_path):
    path = tmp_path / "exp.toml"
    path.write_text(MANIFEST)
    manifest = ExperimentManifest.load(path)

    assert manifest.graph.source == "sbm:3x20:0.5:0.05"
    assert manifest.queries.mode == "hotspot"
    assert manifest.train.epochs == 2
    assert manifest.run.budgets == [32, 64]
    assert [m.display_name for m in manifest.methods] == ["alt", "aac-identity"]
    assert manifest.methods[1].init == "identity_first_m"
    assert ExperimentManifest.from_text(manifest.dump()).fingerprint == manifest.fingerprint


@pytest.mark.parametrize("text", [
    "[graph\nsource = 1",
    MANIFEST.replace('name = "alt"', 'name = "dijkstra"'),
    MANIFEST.replace('label = "aac-identity"', 'label = "alt"'),
    MANIFEST.replace("seeds = [1, 2]", "seeds = []"),
])
def test_manifest_errors(text):
    with pytest.raises(ManifestError):
        ExperimentManifest.from_text(text)


def test_sweep_covers_every_cell(workspace):
    methods = [MethodSpec(name=n) for n in ("zero", "alt", "aac", "cdh", "cdh_sub", "hybrid")]
    budgets = [BudgetSpec(16, False), BudgetSpec(32, False)]
    records = run_sweep(workspace, methods, budgets, seeds=[1, 2], query_count=10)

    assert len(records) == 2 * 2 * len(methods)
    assert [(r.seed, r.budget, r.method) for r in records[:3]] == [(1, 16, "zero"), (1, 16, "alt"), (1, 16, "aac")]
    assert all(r.ok for r in records), [r.error for r in records if not r.ok]
    for record in records:
        assert len(record.rows) == 10
        assert record.violations == 0
        if record.method == "zero":
            assert record.reduction_pct == 0.0
        assert record.suboptimal == 0
        if record.method in ("alt", "aac", "hybrid"):
            assert record.reduction_pct >= 0.0


def test_every_method_runs(workspace):
    queries = sample_queries(workspace.graph, 8, seed=9, report=workspace.report)
    budget = BudgetSpec(32, False)
    for name in ("fps", "first_m", "random_subset", "greedy_max", "fps_rr", "cdh_sub_bpmx"):
        record = run_cell(workspace, MethodSpec(name=name, restarts=2), budget, queries, seed=9)
        assert record.ok, record.error
        assert record.violations == 0
        assert record.suboptimal == 0
        assert record.params


@pytest.mark.parametrize("directed", [False, True])
def test_cdh_cells_find_optimal_paths_on_cyclic_graphs(directed):
    graph = random_connected_graph(80, 160, 1, directed=directed)
    workspace = BenchWorkspace(graph, BenchSettings(label_dtype="float64", cdh_pool_size=16))
    queries = sample_queries(graph, 60, seed=5, report=workspace.report)
    for name in ("cdh", "cdh_sub", "cdh_sub_bpmx"):
        record = run_cell(workspace, MethodSpec(name=name), BudgetSpec(28, directed), queries, seed=5)
        assert record.ok, record.error
        assert record.violations == 0
        assert record.suboptimal == 0


def test_small_budget_cdh_cell_records_error(workspace):
    queries = sample_queries(workspace.graph, 5, seed=1, report=workspace.report)
    record = run_cell(workspace, MethodSpec(name="cdh"), BudgetSpec(8, False), queries, seed=1)
    assert not record.ok
    assert "CDH" in record.error
    assert np.isnan(mean_reduction([record]))


def test_first_m_arm_matches_fps_alt(workspace):
    queries = sample_queries(workspace.graph, 15, seed=3, report=workspace.report)
    prefix = first_m_pool_arm(workspace, k0=16, m=4, queries=queries)
    alt = run_cell(workspace, MethodSpec(name="alt"), BudgetSpec(16, False), queries, seed=0)
    assert prefix.mean_expansions == alt.mean_expansions
    with pytest.raises(ValueError):
        first_m_pool_arm(workspace, k0=4, m=8, queries=queries)


def test_narrowed_labels_pass_audit(sbm):
    workspace = BenchWorkspace(sbm, BenchSettings(label_dtype="float32"))
    queries = sample_queries(sbm, 10, seed=2, report=workspace.report)
    record = run_cell(workspace, MethodSpec(name="alt"), BudgetSpec(32, False), queries, seed=2)
    assert record.ok
    assert record.violations == 0


def test_shared_query_check():
    records = [BenchRecord("g", "alt", "alt", 32, 1, "abc"), BenchRecord("g", "aac", "aac", 32, 1, "def")]
    with pytest.raises(RuntimeError):
        check_shared_queries(records)
    check_shared_queries([records[0], BenchRecord("g", "aac", "aac", 32, 2, "def")])


def test_bench_csvs_feed_the_summary(tmp_path, workspace):
    methods = [MethodSpec(name="alt"), MethodSpec(name="zero")]
    records = run_sweep(workspace, methods, [BudgetSpec(32, False)], seeds=[1, 2], query_count=20)
    cells, queries = write_bench_csvs(records, tmp_path, ["# tool=test"])

    cell_frame = read_commented_csv(cells)
    assert list(cell_frame.columns) == SUMMARY_COLUMNS
    assert len(cell_frame) == 4
    query_frame = read_commented_csv(queries)
    assert len(query_frame) == 2 * 2 * 20
    assert "expansions=" in queries.read_text().splitlines()[1]

    summary = summarize_pairs(query_frame, "alt", "zero")
    assert len(summary) == 1
    assert summary.loc[0, "mean_diff"] >= 0.0


def test_forced_first_m_selector():
    selector = forced_first_m(8, 6, directed=True)
    idx_fwd, idx_bwd = selector.hard_indices()
    assert idx_fwd.tolist() == [0, 1, 2]
    assert idx_bwd.tolist() == [0, 1, 2]


def test_drift_table(workspace):
    table = drift_diagnostic(workspace, k0=8, m=4, epochs_list=[0, 2], seeds=[1], query_count=10,
                             train_config=workspace.settings.train)
    summary = table.summary

    assert list(summary.columns) == DRIFT_COLUMNS
    assert summary["row"].tolist() == ["fps_alt", "forced_first_m", "identity_case", "trained@0", "trained@2"]
    by_row = summary.set_index("row")
    assert by_row.loc["forced_first_m", "mean_expansions"] == by_row.loc["fps_alt", "mean_expansions"]
    assert by_row.loc["forced_first_m", "gap_to_ceiling"] == 0.0
    assert (summary["violations"] == 0).all()
    assert len(table.per_seed) == 5


def test_drift_argument_errors(workspace):
    with pytest.raises(ValueError):
        drift_diagnostic(workspace, k0=2, m=4, epochs_list=[0], seeds=[1])
    directed = BenchWorkspace(Graph(4, [0, 1, 2, 3], [1, 2, 3, 0], np.ones(4), directed=True))
    with pytest.raises(ValueError):
        drift_diagnostic(directed, k0=4, m=3, epochs_list=[0], seeds=[1])
