"""CLI commands for running and preparing experiments."""

import json
from pathlib import Path
from typing import Optional

import click
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn, TimeElapsedColumn
from tabulate import tabulate

from src.commands.common import config_option, console, emit_json, fail, load_config
from src.errors import ConfigError, CongestionError
from src.services.experiment_config import gen_chain, gen_parallel
from src.services.experiment_runner import run_experiment
from src.services.graph_service import build_dag, count_paths


def run_options(func):
    """Options shared by the run commands."""
    options = [
        config_option,
        click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path),
                     help="Output directory (overrides config 'output')"),
        click.option("--seeds", type=click.IntRange(min=1), help="Run seeds 0..N-1 instead of the config list"),
        click.option("--stride", type=click.IntRange(min=1), help="Record metrics every K rounds"),
        click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True,
                     help="Parallel worker processes, one seed each"),
        click.option("--quiet", is_flag=True, help="Hide the progress display"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _run(kind: str, config_path: Path, out_dir: Optional[Path], seeds: Optional[int],
         stride: Optional[int], workers: int, quiet: bool) -> None:
    try:
        config = load_config(config_path, seeds=seeds, stride=stride,
                             output=str(out_dir) if out_dir is not None else None)
    except ConfigError as e:
        fail(e)

    try:
        if quiet:
            report = run_experiment(config, kind, workers=workers)
        else:
            refresh = max(1, config.T // 200)
            with Progress(
                SpinnerColumn(),
                TextColumn("[progress.description]{task.description}"),
                BarColumn(),
                TextColumn("[progress.percentage]{task.percentage:>3.0f}%"),
                TimeElapsedColumn(),
                console=console,
            ) as progress:
                tasks = {seed: progress.add_task(f"[cyan]seed {seed}", total=config.T) for seed in config.seeds}

                def tick(seed: int, t: int) -> None:
                    if t % refresh == 0 or t == config.T:
                        progress.update(tasks[seed], completed=t)

                report = run_experiment(config, kind, workers=workers, progress=tick)
    except (CongestionError, ValueError, ArithmeticError) as e:
        fail(e)

    emit_json(report)


@click.command("run-dynamics")
@run_options
def run_dynamics_cmd(config_path, out_dir, seeds, stride, workers, quiet):
    """Run multi-agent learning dynamics and write per-seed metric CSVs."""
    _run("dynamics", config_path, out_dir, seeds, stride, workers, quiet)


@click.command("run-adversarial")
@run_options
def run_adversarial_cmd(config_path, out_dir, seeds, stride, workers, quiet):
    """Run one learner against the configured cost adversary."""
    _run("adversarial", config_path, out_dir, seeds, stride, workers, quiet)


@click.command("validate-config")
@config_option
@click.option("--show", is_flag=True, help="Print the normalized configuration as JSON")
def validate_config_cmd(config_path, show):
    """Check a configuration file and summarize the game it describes."""
    try:
        config = load_config(config_path)
        rows = config.describe()
    except CongestionError as e:
        fail(e)

    click.echo(f"\n✅ {config_path.name} is valid\n", err=True)
    click.echo(tabulate(rows, headers=["Field", "Value"], tablefmt="simple"), err=True)
    click.echo(err=True)
    if show:
        emit_json(config.to_dict(), indent=2)


@click.command("gen-chain")
@click.argument("segments", type=click.IntRange(min=1))
@click.argument("edges_per_segment", type=click.IntRange(min=1))
@click.option("--parallel", is_flag=True, help="Ignore SEGMENTS and emit two nodes joined by parallel edges")
@click.option("--output", "output_file", type=click.Path(dir_okay=False, path_type=Path),
              help="Write the graph spec here instead of stdout")
def gen_chain_cmd(segments, edges_per_segment, parallel, output_file):
    """Generate a chain multigraph: SEGMENTS links of EDGES_PER_SEGMENT parallel edges."""
    spec = gen_parallel(edges_per_segment) if parallel else gen_chain(segments, edges_per_segment)
    try:
        dag = build_dag(spec["nodes"], spec["edges"])
        paths = count_paths(dag, 0, spec["nodes"] - 1)
    except CongestionError as e:
        fail(e)

    table = [["nodes", spec["nodes"]], ["edges", dag.edge_count], ["paths", paths]]
    click.echo(tabulate(table, headers=["Graph", "Count"], tablefmt="simple"), err=True)
    if output_file is not None:
        output_file.parent.mkdir(parents=True, exist_ok=True)
        output_file.write_text(json.dumps(spec) + "\n", encoding="utf-8")
        click.echo(f"✅ Graph spec written to {output_file}", err=True)
    else:
        emit_json(spec)
