"""Run a configured experiment over all of its seeds."""

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import pandas as pd

from src.services.dynamics_service import best_iterate_summary, game_schedules, run_adversarial, run_dynamics
from src.services.experiment_config import ExperimentConfig
from src.services.learner import make_schedule
from src.services.metrics_writer import (
    aggregate_frames,
    records_to_frame,
    seed_csv_path,
    summarize_run,
    summarize_seeds,
    write_csv,
)

logger = logging.getLogger(__name__)

RUN_KINDS = ("dynamics", "adversarial")

# Called with (seed, rounds done) as a run progresses.
SeedProgress = Callable[[int, int], None]


def run_seed(
    config_data: Dict[str, Any],
    kind: str,
    seed: int,
    out_dir: str,
    progress: Optional[SeedProgress] = None,
) -> Tuple[Dict[str, Any], pd.DataFrame]:
    """Run one seed, write its CSV and return its summary and metrics.

    Takes the config as a plain dict so it can be shipped to worker
    processes.
    """
    config = ExperimentConfig.from_dict(config_data)
    game = config.build_game()
    tick = (lambda t: progress(seed, t)) if progress is not None else None

    if kind == "dynamics":
        schedules = game_schedules(game, config.preset, config.c_gamma, config.c_mu)
        result = run_dynamics(game, schedules, config.T, seed, config.metric_stride, config.init, tick)
        frame = records_to_frame(result.records)
        summary = summarize_run(frame, seed)
        summary["best_iterate"] = best_iterate_summary(result.records, result.extra["aux_rng"])
    elif kind == "adversarial":
        polytope = game.polytopes[0]
        adversary = config.adversary_spec()
        schedule = make_schedule(config.preset, 1, game.m, polytope.active_count, adversary.c_max,
                                 config.c_gamma, config.c_mu)
        records, regret = run_adversarial(polytope, schedule, adversary, config.T, seed,
                                          config.metric_stride, config.init, tick)
        frame = records_to_frame(records)
        summary = summarize_run(frame, seed, game=False)
        summary["regret"] = regret
    else:
        raise ValueError(f"Unknown run kind '{kind}', expected one of {RUN_KINDS}")

    summary["csv"] = str(write_csv(frame, seed_csv_path(Path(out_dir), config.name, seed)))
    return summary, frame


def run_experiment(
    config: ExperimentConfig,
    kind: str,
    workers: int = 1,
    progress: Optional[SeedProgress] = None,
) -> Dict[str, Any]:
    """Run every seed of ``config`` and write per-seed and mean CSVs.

    With ``workers > 1`` seeds run in a process pool; progress is then
    reported once per finished seed (as ``(seed, T)``). Results are merged
    in seed order either way.
    """
    out_dir = Path(config.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    data = config.to_dict()
    logger.info(f"Experiment '{config.name}' ({kind}): {len(config.seeds)} seed(s), workers={workers}")

    outcomes: List[Tuple[Dict[str, Any], pd.DataFrame]] = []
    if workers <= 1 or len(config.seeds) == 1:
        for seed in config.seeds:
            outcomes.append(run_seed(data, kind, seed, str(out_dir), progress))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_seed, data, kind, seed, str(out_dir)) for seed in config.seeds]
            for seed, future in zip(config.seeds, futures):
                outcomes.append(future.result())
                if progress is not None:
                    progress(seed, config.T)

    summaries = [summary for summary, _ in outcomes]
    report: Dict[str, Any] = {
        "name": config.name,
        "kind": kind,
        "T": config.T,
        "seeds": summaries,
        "mean": summarize_seeds(summaries),
    }
    if len(outcomes) > 1:
        mean_path = out_dir / f"{config.name}_mean.csv"
        write_csv(aggregate_frames([frame for _, frame in outcomes]), mean_path)
        report["mean_csv"] = str(mean_path)
    return report
