import pytest
from typer.testing import CliRunner

from app import EXIT_AUDIT_FAILED, EXIT_FAILED, EXIT_INVALID_BUDGET, EXIT_MISSING_INPUT, EXIT_UNREADABLE, app
from config import Config, config, get_config
from graphs.parsers import load_graph
from utils.config_loader import get_env_variable
from utils.io import read_commented_csv

runner = CliRunner()

GRAPH = "sbm:3x20:0.5:0.05"

MANIFEST = f"""
[graph]
source = "{GRAPH}"
seed = 5

[queries]
count = 15

[train]
epochs = 2
queries_per_epoch = 64

[run]
budgets = [32]
seeds = [1, 2]

[[methods]]
name = "alt"

[[methods]]
name = "zero"

[[methods]]
name = "aac"
"""


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    """Relative cache and result paths land in a scratch directory"""
    monkeypatch.chdir(tmp_path)
    monkeypatch.setattr(config, "label_dtype", "float64")
    return tmp_path


def test_gen_writes_dimacs_with_provenance(workdir):
    result = runner.invoke(app, ["gen", "--graph", GRAPH, "--out", "g.gr", "--seed", "3"])
    assert result.exit_code == 0, result.output

    lines = (workdir / "g.gr").read_text().splitlines()
    assert lines[0].startswith("c tool=")
    assert load_graph(workdir / "g.gr").num_vertices == 60


def test_gen_edge_list(workdir):
    result = runner.invoke(app, ["gen", "--graph", "path:5", "--out", "p.txt"])
    assert result.exit_code == 0, result.output
    graph = load_graph(workdir / "p.txt")
    assert graph.num_vertices == 5
    assert not graph.directed


def test_labels_command(workdir):
    result = runner.invoke(app, ["labels", "--graph", "path:9", "--k", "3", "--out-dir", "out", "--cdh-r", "2"])
    assert result.exit_code == 0, result.output
    for name in ("pool.txt", "labels.bin", "cdh.bin"):
        assert (workdir / "out" / name).exists()
    assert "covering radius" in result.output


def test_labels_pool_larger_than_graph(workdir):
    result = runner.invoke(app, ["labels", "--graph", "path:4", "--k", "9", "--out-dir", "out"])
    assert result.exit_code == EXIT_FAILED


def test_train_command(workdir):
    result = runner.invoke(app, ["train", "--graph", GRAPH, "--k0", "8", "--m", "4", "--out-dir", "sel",
                                 "--epochs", "2", "--checkpoints", "1,2"])
    assert result.exit_code == 0, result.output
    assert (workdir / "sel" / "selector.bin").exists()
    assert (workdir / "sel" / "selector-epoch1.bin").exists()
    trace = read_commented_csv(workdir / "sel" / "train.csv")
    assert trace["epoch"].tolist() == [1, 2]


def test_audit_command(workdir):
    result = runner.invoke(app, ["audit", "--graph", GRAPH, "--method", "alt", "--budget", "32",
                                 "--queries", "10", "--out", "audit.csv"])
    assert result.exit_code == 0, result.output
    frame = read_commented_csv(workdir / "audit.csv")
    assert len(frame) == 10
    assert frame["heuristic_violations"].sum() == 0


@pytest.mark.parametrize("args, code", [
    (["--graph", GRAPH, "--budget", "30"], EXIT_INVALID_BUDGET),
    (["--graph", "missing.gr"], EXIT_MISSING_INPUT),
    (["--graph", GRAPH, "--method", "magic"], EXIT_FAILED),
])
def test_audit_exit_codes(args, code):
    result = runner.invoke(app, ["audit", "--queries", "5"] + args)
    assert result.exit_code == code
    assert result.exit_code != EXIT_AUDIT_FAILED


def test_unreadable_graph_file(workdir):
    (workdir / "bad.gr").write_text("p sp 2 1\na 1 5 3\n")
    result = runner.invoke(app, ["audit", "--graph", "bad.gr", "--queries", "5"])
    assert result.exit_code == EXIT_UNREADABLE


def test_bench_then_stats(workdir):
    (workdir / "exp.toml").write_text(MANIFEST)
    result = runner.invoke(app, ["bench", "--manifest", "exp.toml", "--out-dir", "run"])
    assert result.exit_code == 0, result.output

    cells = read_commented_csv(workdir / "run" / "cells.csv")
    assert len(cells) == 2 * 3
    assert (cells["error"].fillna("") == "").all()
    assert (workdir / "run" / "queries.csv").read_text().startswith("# tool=")

    result = runner.invoke(app, ["stats", "--queries-csv", "run/queries.csv", "--method-a", "alt",
                                 "--method-b", "zero", "--out", "stats.csv"])
    assert result.exit_code == 0, result.output
    summary = read_commented_csv(workdir / "stats.csv")
    assert summary["budget"].tolist() == [32]

    result = runner.invoke(app, ["stats", "--queries-csv", "run/queries.csv", "--method-a", "alt",
                                 "--method-b", "cdh"])
    assert result.exit_code == EXIT_FAILED


def test_bench_from_options(workdir):
    result = runner.invoke(app, ["bench", "--graph", GRAPH, "--budgets", "16,32", "--methods", "alt,cdh",
                                 "--seeds", "4", "--queries", "8", "--out-dir", "quick"])
    assert result.exit_code == 0, result.output
    assert len(read_commented_csv(workdir / "quick" / "cells.csv")) == 4


def test_bench_input_errors(workdir):
    assert runner.invoke(app, ["bench"]).exit_code == EXIT_MISSING_INPUT
    assert runner.invoke(app, ["bench", "--manifest", "nope.toml"]).exit_code == EXIT_MISSING_INPUT
    assert runner.invoke(app, ["bench", "--graph", GRAPH, "--budgets", "30"]).exit_code == EXIT_INVALID_BUDGET

    (workdir / "broken.toml").write_text("[graph\n")
    assert runner.invoke(app, ["bench", "--manifest", "broken.toml"]).exit_code == EXIT_UNREADABLE


def test_drift_command(workdir):
    result = runner.invoke(app, ["drift", "--graph", GRAPH, "--k0", "8", "--m", "4", "--epochs", "0,2",
                                 "--seeds", "1", "--queries", "10", "--out-dir", "drift"])
    assert result.exit_code == 0, result.output
    summary = read_commented_csv(workdir / "drift" / "drift.csv")
    assert summary["row"].tolist()[:2] == ["fps_alt", "forced_first_m"]
    assert (workdir / "drift" / "drift_per_seed.csv").exists()


def test_config_command(workdir):
    result = runner.invoke(app, ["config", "--save", "saved.env"])
    assert result.exit_code == 0, result.output
    assert "LABEL_DTYPE=float64" in (workdir / "saved.env").read_text()


def test_config_overrides_are_shown_and_saved(workdir):
    result = runner.invoke(app, ["config", "--set", "query_count=7", "--set", "seeds=3,4",
                                 "--set", "use_cache=false", "--save", "custom.env"])
    assert result.exit_code == 0, result.output
    assert "Landmark Toolkit Configuration" in result.output
    saved = (workdir / "custom.env").read_text()
    assert "QUERY_COUNT=7" in saved
    assert "DEFAULT_SEEDS=3,4" in saved
    assert "USE_CACHE=false" in saved
    # the process-wide settings are left alone
    assert config.query_count != 7


@pytest.mark.parametrize("override", ["no_such_key=1", "query_count", "query_count=many", "label_dtype=int8"])
def test_config_rejects_bad_overrides(override):
    result = runner.invoke(app, ["config", "--set", override])
    assert result.exit_code == EXIT_FAILED


def test_update_config_coerces_to_setting_types():
    settings = Config()
    assert settings.update_config(epochs="12", tau_end="0.05", use_cache="False", seeds="5, 6") == []
    assert settings.epochs == 12
    assert settings.tau_end == 0.05
    assert settings.use_cache is False
    assert settings.seeds == [5, 6]
    assert settings.update_config(validate_config="1", bogus=2) == ["validate_config", "bogus"]
    assert get_config() is config


def test_cdh_audit_finds_optimal_paths(workdir):
    result = runner.invoke(app, ["audit", "--graph", GRAPH, "--method", "cdh_sub_bpmx", "--budget", "32",
                                 "--queries", "40", "--out", "cdh.csv"])
    assert result.exit_code == 0, result.output
    frame = read_commented_csv(workdir / "cdh.csv")
    assert frame["heuristic_violations"].sum() == 0


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("DEFAULT_SEEDS", "7, 8")
    monkeypatch.setenv("LANDMARK_CACHE_DIR", "elsewhere")
    monkeypatch.setenv("LABEL_DTYPE", "float16")
    settings = Config()
    assert settings.seeds == [7, 8]
    assert str(settings.cache_dir) == "elsewhere"
    assert not settings.validate_config()

    monkeypatch.delenv("UNSET_FOR_TEST", raising=False)
    with pytest.raises(ValueError):
        get_env_variable("UNSET_FOR_TEST")
