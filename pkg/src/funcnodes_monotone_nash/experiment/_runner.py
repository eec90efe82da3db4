import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from ..errors import UsageError
from ..game import GameDefinition, sample_box
from ..learner import (
    LearnerConfig,
    RecordBuffer,
    check_schedule,
    records_to_frame,
    run,
)
from ..utils import get_logger, make_rng, replication_seed
from ._config import ExperimentConfig

logger = get_logger("experiment")

THREADS_ENV = "MONOTONE_NASH_THREADS"
HIT_RADIUS = 0.1
SUMMARY_COLUMNS = ["replication", "final_dist", "first_hit_0p1", "wall_ms"]


@dataclass(frozen=True)
class RunSummary:
    replication: int
    final_dist: float
    first_hit: Optional[int]
    wall_ms: float


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    runs: pd.DataFrame
    summaries: List[RunSummary]

    def summary_frame(self) -> pd.DataFrame:
        return summaries_to_frame(self.summaries)


def summaries_to_frame(summaries: List[RunSummary]) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "replication": [s.replication for s in summaries],
            "final_dist": [s.final_dist for s in summaries],
            "first_hit_0p1": pd.array([s.first_hit for s in summaries], dtype="Int64"),
            "wall_ms": [s.wall_ms for s in summaries],
        },
        columns=SUMMARY_COLUMNS,
    )


def worker_count(replications: int) -> int:
    """Replication workers, capped by MONOTONE_NASH_THREADS when set."""
    n = min(int(replications), os.cpu_count() or 1)
    cap = os.environ.get(THREADS_ENV, "").strip()
    if cap:
        try:
            limit = int(cap)
        except ValueError as exc:
            raise UsageError(f"{THREADS_ENV} must be an integer, got {cap!r}") from exc
        if limit < 1:
            raise UsageError(f"{THREADS_ENV} must be at least 1")
        n = min(n, limit)
    return max(n, 1)


def initial_means(config: ExperimentConfig, game: GameDefinition, replication: int) -> np.ndarray:
    if config.mu0 is not None:
        return config.mu0
    seed = replication_seed(config.base_seed, replication)
    # own stream, independent of the learner's sampling stream
    return sample_box(game, make_rng([seed, 1]), 1)[0]


def learner_config(config: ExperimentConfig, replication: int) -> LearnerConfig:
    game = config.game_definition()
    return LearnerConfig(
        game=game,
        exponents=config.exponents,
        mu0=initial_means(config, game, replication),
        max_iters=int(config.max_iters),
        seed=replication_seed(config.base_seed, replication),
        regularized=bool(config.regularized),
        thinning=config.thinning,
        allow_invalid_schedule=bool(config.allow_invalid_schedule),
    )


def first_hit(frame: pd.DataFrame, radius: float = HIT_RADIUS) -> Optional[int]:
    """First recorded iteration whose updated means are within ``radius`` of the reference."""
    hits = frame.loc[frame["dist_ref"] <= radius, "t"]
    return None if hits.empty else int(hits.min())


def run_replication(
    config: ExperimentConfig, replication: int
) -> Tuple[pd.DataFrame, RunSummary]:
    lc = learner_config(config, replication)
    records = RecordBuffer()
    start = time.perf_counter()
    state = run(lc, records, check=False)
    wall_ms = (time.perf_counter() - start) * 1000.0
    frame = records_to_frame(records, replication)
    ref = lc.game.reference_equilibrium
    final = float("nan") if ref is None else float(np.linalg.norm(state.mu - ref))
    summary = RunSummary(replication, final, first_hit(frame), wall_ms)
    logger.debug(
        "replication %d of %s: final distance %.4g, first hit %s",
        replication,
        lc.game.name,
        final,
        summary.first_hit,
    )
    return frame, summary


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Runs all replications in a thread pool; results are ordered by replication index."""
    check_schedule(learner_config(config, 0))
    n = int(config.replications)
    workers = worker_count(n)
    logger.info(
        "running %d replications of %s for %d iterations on %d workers",
        n,
        config.game,
        config.max_iters,
        workers,
    )
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda rep: run_replication(config, rep), range(n)))
    runs = pd.concat([frame for frame, _ in results], ignore_index=True)
    return ExperimentResult(config, runs, [summary for _, summary in results])


def distance_by_iteration(runs: pd.DataFrame) -> pd.DataFrame:
    """Distance to the reference per (replication, t), one row each."""
    return (
        runs.drop_duplicates(["replication", "t"])[["replication", "t", "dist_ref"]]
        .reset_index(drop=True)
    )


def median_distance(runs: pd.DataFrame) -> pd.Series:
    """Median over replications of the distance to the reference, indexed by t."""
    return distance_by_iteration(runs).groupby("t")["dist_ref"].median()


def median_trajectories(runs: pd.DataFrame) -> pd.DataFrame:
    """Quartiles of each mean coordinate across replications, per t."""
    grouped = runs.groupby(["player", "dim", "t"])["mu"]
    out = grouped.quantile([0.25, 0.5, 0.75]).unstack()
    out.columns = ["q25", "median", "q75"]
    return out.reset_index()
