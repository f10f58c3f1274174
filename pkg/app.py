#!/usr/bin/env python3
"""
Command-line entry point for the landmark heuristic toolkit
"""

import contextlib
import copy
import logging
import sys
from pathlib import Path
from typing import Annotated, List, Optional

import typer
from rich import box
from rich.console import Console
from rich.table import Table

# Add the project root to Python path
project_root = Path(__file__).parent
sys.path.append(str(project_root))

from analysis.summary import summarize_pairs
from bench.budget import BudgetSpec
from bench.drift import drift_diagnostic
from bench.manifest import ExperimentManifest, GraphSection, MethodSpec, QuerySection, RunSection
from bench.protocol import (BenchSettings, BenchWorkspace, build_heuristic, records_summary_frame, run_sweep,
                            write_bench_csvs)
from bench.queries import sample_queries
from config import config, get_config
from graphs.generators import graph_from_source
from graphs.graph import Graph
from graphs.parsers import write_dimacs_gr, write_edge_list
from heuristics.cdh import build_cdh, save_cdh
from landmarks.labels import build_labels_cached, save_labels
from landmarks.pool import save_pool
from landmarks.selection import covering_radius, fps_select
from models.selector import save_selector
from models.trainer import TrainConfig, train
from search.audit import audit, summarize_audit, write_audit_csv
from utils.config_loader import parse_int_list
from utils.errors import BudgetError, GraphFormatError, LandmarkError, ManifestError, TrainingDivergedError
from utils.io import provenance_lines, read_commented_csv, write_commented_csv
from utils.logging_setup import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_AUDIT_FAILED = 1
EXIT_MISSING_INPUT = 2
EXIT_INVALID_BUDGET = 3
EXIT_UNREADABLE = 4
EXIT_FAILED = 5

app = typer.Typer(
    name="landmark-astar",
    help="Landmark heuristics for A*: ALT, learned compression and CDH, with matched-memory benchmarks",
    add_completion=False,
    rich_markup_mode="rich",
)
console = Console()


@contextlib.contextmanager
def exit_on_errors(stage: str):
    """Map library errors onto the CLI exit codes"""
    try:
        yield
    except typer.Exit:
        raise
    except FileNotFoundError as e:
        console.print(f"[red]{stage}: missing input:[/red] {e}")
        raise typer.Exit(EXIT_MISSING_INPUT)
    except BudgetError as e:
        console.print(f"[red]{stage}: invalid budget:[/red] {e}")
        raise typer.Exit(EXIT_INVALID_BUDGET)
    except (GraphFormatError, ManifestError, UnicodeDecodeError) as e:
        console.print(f"[red]{stage}: unreadable input:[/red] {e}")
        raise typer.Exit(EXIT_UNREADABLE)
    except (LandmarkError, ValueError, RuntimeError, OSError) as e:
        logger.exception(f"{stage} failed")
        console.print(f"[red]{stage} failed:[/red] {e}")
        raise typer.Exit(EXIT_FAILED)


def _int_list(text: str, label: str) -> List[int]:
    try:
        values = parse_int_list(text)
    except ValueError:
        raise typer.BadParameter(f"{label} must be a comma-separated list of integers, got {text!r}")
    if not values:
        raise typer.BadParameter(f"{label} must list at least one value")
    return values


def _load_graph(source: str, seed: int) -> Graph:
    graph = graph_from_source(source, seed=seed)
    logger.info(f"Graph {graph!r}")
    return graph


def _bench_settings(manifest: Optional[ExperimentManifest] = None) -> BenchSettings:
    """Bench knobs from the configuration, overridden by a manifest when given"""
    bench = config.get_bench_config()
    overrides = manifest.train.model_dump(exclude_none=True) if manifest else {}
    return BenchSettings(
        label_dtype=manifest.run.label_dtype if manifest else bench["label_dtype"],
        k0_multiplier=bench["k0_multiplier"],
        cdh_pool_size=bench["cdh_pool_size"],
        fps_restarts=bench["fps_restarts"],
        validation_count=manifest.queries.validation_count if manifest else config.query_count,
        audit_rel_tol=bench["audit_rel_tol"],
        narrowed_audit_rel_tol=bench["narrowed_audit_rel_tol"],
        cache_dir=str(config.cache_dir) if config.use_cache else None,
        train=TrainConfig.from_config(config.get_train_config(), **overrides),
    )


def _query_kwargs() -> dict:
    queries = config.get_query_config()
    return {"fraction": queries["hotspot_fraction"], "share": queries["hotspot_share"],
            "exponent": queries["powerlaw_exponent"]}


def _show_frame(title: str, frame, columns: List[str]) -> None:
    table = Table(title=title, box=box.SIMPLE_HEAVY)
    for column in columns:
        table.add_column(column)
    for _, row in frame.iterrows():
        cells = []
        for column in columns:
            value = row[column]
            cells.append(f"{value:.3f}" if isinstance(value, float) else str(value))
        table.add_row(*cells)
    console.print(table)


@app.callback()
def main(
    log_level: Annotated[str, typer.Option(
        "--log-level",
        help="Logging level (DEBUG, INFO, WARNING, ERROR)"
    )] = config.log_level,
):
    """Landmark heuristic toolkit"""
    setup_logging(log_level, config.get_logging_config()["log_file"])


@app.command()
def gen(
    graph: Annotated[str, typer.Option("--graph", "-g", help="sbm:BxS[:p_in:p_out], ba:N:M, path:N or a file")],
    out: Annotated[Path, typer.Option("--out", "-o", help="Output file (.gr for DIMACS, otherwise edge list)")],
    seed: Annotated[int, typer.Option("--seed", "-s", help="Generator seed")] = config.graph_seed,
):
    """Generate (or convert) a graph file"""
    with exit_on_errors("gen"):
        g = _load_graph(graph, seed)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w") as handle:
            for line in provenance_lines(seed, source=graph, graph=g.fingerprint):
                handle.write(("c" + line[1:] if out.suffix == ".gr" else line) + "\n")
            if out.suffix == ".gr":
                write_dimacs_gr(g, handle)
            else:
                write_edge_list(g, handle)
        console.print(f"Wrote {g.num_vertices} vertices, {g.num_edges} arcs to {out}")


@app.command()
def labels(
    graph: Annotated[str, typer.Option("--graph", "-g", help="Graph source")],
    k: Annotated[int, typer.Option("--k", help="FPS pool size", min=1)],
    out_dir: Annotated[Path, typer.Option("--out-dir", "-o", help="Directory for pool and label files")],
    seed: Annotated[int, typer.Option("--seed", "-s", help="Generator seed")] = config.graph_seed,
    cdh_r: Annotated[Optional[int], typer.Option("--cdh-r", help="Also build CDH with r entries per vertex",
                                                 min=1)] = None,
):
    """FPS landmark pool and exact SSSP labels"""
    with exit_on_errors("labels"):
        g = _load_graph(graph, seed)
        settings = _bench_settings()
        workspace = BenchWorkspace(g, settings)
        pool = fps_select(g, k, workspace.start_vertex, workspace.report)
        table = build_labels_cached(g, pool, settings.cache_dir, workspace.report)
        header = provenance_lines(seed, graph=g.fingerprint, labels=table.fingerprint)

        save_pool(pool, out_dir / "pool.txt", header)
        save_labels(table, out_dir / "labels.bin")
        radius = covering_radius(table, list(range(table.k0)))
        console.print(f"Pool of {len(pool)} landmarks from start vertex {pool.start_vertex}; "
                      f"covering radius {radius.r_m:g} (witness {radius.witness_vertex})")
        if cdh_r is not None:
            cdh = build_cdh(table, cdh_r)
            save_cdh(cdh, out_dir / "cdh.bin")
            console.print(f"CDH with r={cdh.r} stored {cdh.entries_per_vertex()} entries per vertex")


@app.command(name="train")
def train_cmd(
    graph: Annotated[str, typer.Option("--graph", "-g", help="Graph source")],
    k0: Annotated[int, typer.Option("--k0", help="Full landmark pool size", min=1)],
    m: Annotated[int, typer.Option("--m", help="Compressed values per vertex", min=1)],
    out_dir: Annotated[Path, typer.Option("--out-dir", "-o", help="Directory for the selector and trace")],
    seed: Annotated[int, typer.Option("--seed", "-s", help="Training seed")] = 42,
    graph_seed: Annotated[int, typer.Option("--graph-seed", help="Generator seed")] = config.graph_seed,
    epochs: Annotated[Optional[int], typer.Option("--epochs", help="Override EPOCHS", min=0)] = None,
    init: Annotated[Optional[str], typer.Option("--init", help="block_sparse or identity_first_m")] = None,
    lambda_cov: Annotated[Optional[float], typer.Option("--lambda-cov", help="Coverage weight", min=0)] = None,
    checkpoints: Annotated[str, typer.Option("--checkpoints", help="Epochs to snapshot, comma-separated")] = "",
):
    """Train the row-stochastic landmark selector"""
    with exit_on_errors("train"):
        g = _load_graph(graph, graph_seed)
        settings = _bench_settings()
        workspace = BenchWorkspace(g, settings)
        table = workspace.labels(workspace.fps_pool(k0))
        train_config = TrainConfig.from_config(config.get_train_config(), seed=seed, epochs=epochs, init=init,
                                               lambda_cov=lambda_cov,
                                               checkpoints=tuple(parse_int_list(checkpoints)) if checkpoints else ())
        selector, report = train(table, m, train_config, checkpoint_dir=out_dir)
        header = provenance_lines(seed, graph=g.fingerprint, labels=table.fingerprint)

        save_selector(selector, out_dir / "selector.bin", len(report.losses), seed)
        report.write_csv(out_dir / "train.csv", header)
        console.print(f"Trained K0={k0} m={m}: unique ratio {selector.unique_ratio():.3f}, "
                      f"diverged={report.diverged}")
        if report.diverged:
            raise TrainingDivergedError(f"training diverged after {len(report.losses)} epoch(s)", report)


@app.command()
def bench(
    manifest: Annotated[Optional[Path], typer.Option("--manifest", "-m", help="Experiment manifest (TOML)")] = None,
    graph: Annotated[Optional[str], typer.Option("--graph", "-g", help="Graph source")] = None,
    budgets: Annotated[str, typer.Option("--budgets", help="Bytes per vertex, comma-separated")] = "32",
    methods: Annotated[str, typer.Option("--methods", help="Method names, comma-separated")] = "alt,aac,cdh",
    seeds: Annotated[Optional[str], typer.Option("--seeds", help="Seeds, comma-separated")] = None,
    queries: Annotated[int, typer.Option("--queries", "-q", help="Queries per cell", min=1)] = config.query_count,
    query_mode: Annotated[str, typer.Option("--query-mode", help="uniform, hotspot or powerlaw")] = config.query_mode,
    out_dir: Annotated[Optional[Path], typer.Option("--out-dir", "-o", help="Output directory")] = None,
    jobs: Annotated[Optional[int], typer.Option("--jobs", "-j", help="Parallel seed workers (overrides the manifest)",
                                                min=1)] = None,
):
    """Matched-memory benchmark sweep over methods, budgets and seeds"""
    with exit_on_errors("bench"):
        if manifest is not None:
            spec = ExperimentManifest.load(manifest)
        elif graph is not None:
            spec = ExperimentManifest(
                graph=GraphSection(source=graph, seed=config.graph_seed),
                queries=QuerySection(count=queries, mode=query_mode),
                run=RunSection(budgets=_int_list(budgets, "budgets"),
                               seeds=_int_list(seeds, "seeds") if seeds else config.seeds,
                               output_dir=str(config.results_dir), jobs=jobs or config.max_workers,
                               label_dtype=config.label_dtype),
                methods=[MethodSpec(name=name.strip()) for name in methods.split(",") if name.strip()],
            )
        else:
            console.print("[red]bench needs --manifest or --graph[/red]")
            raise typer.Exit(EXIT_MISSING_INPUT)

        g = graph_from_source(spec.graph.source, spec.graph.seed, spec.graph.w_lo, spec.graph.w_hi)
        budget_specs = [BudgetSpec(b, g.directed) for b in spec.run.budgets]
        workspace = BenchWorkspace(g, _bench_settings(spec))
        records = run_sweep(workspace, spec.methods, budget_specs, spec.run.seeds, spec.queries.count,
                            spec.queries.mode, spec.queries.query_seed, n_jobs=jobs or spec.run.jobs, **_query_kwargs())

        target = out_dir or Path(spec.run.output_dir)
        header = provenance_lines(spec.run.seeds, spec.fingerprint, graph=g.fingerprint)
        cells, _ = write_bench_csvs(records, target, header)
        _show_frame(f"{g.name}: {len(records)} cells", records_summary_frame(records),
                    ["label", "budget", "seed", "mean_expansions", "reduction_pct", "violations", "suboptimal"])
        console.print(f"Wrote {cells}")
        failed = [r for r in records if not r.ok]
        if failed:
            console.print(f"[red]{len(failed)} cell(s) failed[/red]")
            raise typer.Exit(EXIT_FAILED)


@app.command()
def drift(
    graph: Annotated[str, typer.Option("--graph", "-g", help="Graph source")],
    k0: Annotated[int, typer.Option("--k0", help="Full landmark pool size", min=1)] = 32,
    m: Annotated[int, typer.Option("--m", help="Compressed values per vertex", min=1)] = 8,
    epochs: Annotated[str, typer.Option("--epochs", help="Checkpoint epochs, comma-separated")] = "0,50,200",
    seeds: Annotated[Optional[str], typer.Option("--seeds", help="Seeds, comma-separated")] = None,
    queries: Annotated[int, typer.Option("--queries", "-q", help="Queries per seed", min=1)] = config.query_count,
    init: Annotated[Optional[str], typer.Option("--init", help="block_sparse or identity_first_m")] = None,
    out_dir: Annotated[Path, typer.Option("--out-dir", "-o", help="Output directory")] = config.results_dir,
    graph_seed: Annotated[int, typer.Option("--graph-seed", help="Generator seed")] = config.graph_seed,
):
    """Training-drift table: FPS-ALT, forced first-m, identity case and trained checkpoints"""
    with exit_on_errors("drift"):
        g = _load_graph(graph, graph_seed)
        seed_list = _int_list(seeds, "seeds") if seeds else config.seeds
        settings = _bench_settings()
        train_config = TrainConfig.from_config(config.get_train_config(), init=init)
        workspace = BenchWorkspace(g, settings)
        table = drift_diagnostic(workspace, k0, m, _int_list(epochs, "epochs"), seed_list, queries,
                                 config.query_mode, train_config)

        header = provenance_lines(seed_list, graph=g.fingerprint, k0=k0, m=m, init=train_config.init)
        write_commented_csv(table.summary, out_dir / "drift.csv", header)
        write_commented_csv(table.per_seed, out_dir / "drift_per_seed.csv", header)
        _show_frame(f"Drift K0={k0} m={m}", table.summary,
                    ["row", "epochs", "mean_expansions", "reduction_pct", "unique_ratio", "gap_to_ceiling"])


@app.command(name="audit")
def audit_cmd(
    graph: Annotated[str, typer.Option("--graph", "-g", help="Graph source")],
    method: Annotated[str, typer.Option("--method", help="Method name")] = "alt",
    budget: Annotated[int, typer.Option("--budget", "-b", help="Bytes per vertex")] = 32,
    seed: Annotated[int, typer.Option("--seed", "-s", help="Cell seed")] = 42,
    queries: Annotated[int, typer.Option("--queries", "-q", help="Audited queries", min=1)] = config.query_count,
    out: Annotated[Optional[Path], typer.Option("--out", "-o", help="Per-query audit CSV")] = None,
    graph_seed: Annotated[int, typer.Option("--graph-seed", help="Generator seed")] = config.graph_seed,
):
    """Audit one method against Dijkstra; exit 1 on any violation or suboptimal path"""
    with exit_on_errors("audit"):
        g = _load_graph(graph, graph_seed)
        spec = MethodSpec(name=method)
        budget_spec = BudgetSpec(budget, g.directed)
        workspace = BenchWorkspace(g, _bench_settings())
        query_set = sample_queries(g, queries, config.query_mode, seed, workspace.report, **_query_kwargs())
        heuristic, bpmx, params = build_heuristic(workspace, spec, budget_spec, query_set, seed)
        rows = audit(g, list(query_set), heuristic, bpmx=bpmx, rel_tol=workspace.settings.rel_tol,
                     baselines=workspace.baselines(query_set))
        summary = summarize_audit(rows)

        target = out or config.results_dir / f"audit-{method}-B{budget}-s{seed}.csv"
        write_audit_csv(rows, target, provenance_lines(seed, graph=g.fingerprint, method=method, params=params))
        console.print(f"{heuristic.describe()} B={budget}: reduction {summary['reduction_pct']:.2f}%, "
                      f"violations {summary['violations']}, suboptimal {summary['suboptimal']}")
        if summary["violations"] or summary["suboptimal"]:
            raise typer.Exit(EXIT_AUDIT_FAILED)


@app.command()
def stats(
    queries_csv: Annotated[Path, typer.Option("--queries-csv", help="Per-query CSV written by bench")],
    method_a: Annotated[str, typer.Option("--method-a", help="First method label")],
    method_b: Annotated[str, typer.Option("--method-b", help="Second method label")],
    q: Annotated[float, typer.Option("--q", help="FDR rate")] = 0.05,
    delta: Annotated[float, typer.Option("--delta", help="TOST margin in percentage points")] = 1.0,
    alpha: Annotated[float, typer.Option("--alpha", help="TOST level")] = 0.05,
    out: Annotated[Optional[Path], typer.Option("--out", "-o", help="Summary CSV")] = None,
):
    """Paired significance and equivalence tests between two bench arms"""
    with exit_on_errors("stats"):
        frame = read_commented_csv(queries_csv)
        summary = summarize_pairs(frame, method_a, method_b, q, delta, alpha)
        target = out or queries_csv.parent / f"stats-{method_a}-vs-{method_b}.csv"
        write_commented_csv(summary, target, provenance_lines(None, source=queries_csv.name, q=q, delta=delta))
        _show_frame(f"{method_a} vs {method_b}", summary,
                    ["budget", "seeds", "fisher_p", "stouffer_p", "fdr_flag", "tost_p", "mean_diff"])


@app.command(name="config")
def config_cmd(
    save: Annotated[Optional[Path], typer.Option("--save", help="Write the effective settings to a .env file")] = None,
    overrides: Annotated[Optional[List[str]], typer.Option("--set", help="Override a setting, KEY=VALUE (repeatable)")] = None,
):
    """Show the effective configuration"""
    settings = copy.copy(get_config())
    with exit_on_errors("config"):
        pairs = {}
        for item in overrides or []:
            key, sep, value = item.partition("=")
            if not sep or not key.strip():
                raise ValueError(f"--set expects KEY=VALUE, got {item!r}")
            pairs[key.strip()] = value
        unknown = settings.update_config(**pairs)
        if unknown:
            raise ValueError(f"unknown setting(s): {', '.join(unknown)}")
    settings.print_config()
    if not settings.validate_config():
        raise typer.Exit(EXIT_FAILED)
    if save is not None:
        with exit_on_errors("config"):
            settings.save_to_env(str(save))


if __name__ == "__main__":
    app()
