from typing import Optional, Tuple

import exposedfunctionality.function_parser.types as exf_types
import funcnodes as fn
import numpy as np
import pandas as pd

from .._types import GameName
from ._config import (  # noqa: F401
    CONFIG_KEYS,
    ExperimentConfig,
    apply_overrides,
    config_to_text,
    load_config,
    parse_config_text,
)
from ._runner import (  # noqa: F401
    HIT_RADIUS,
    SUMMARY_COLUMNS,
    THREADS_ENV,
    ExperimentResult,
    RunSummary,
    distance_by_iteration,
    first_hit,
    initial_means,
    learner_config,
    median_distance,
    median_trajectories,
    run_experiment,
    run_replication,
    summaries_to_frame,
    worker_count,
)
from ._io import (  # noqa: F401
    frame_to_bytes,
    parse_runs_csv,
    parse_runs_json,
    read_runs,
    write_experiment,
    write_frame,
)
from ._plot import plot_runs  # noqa: F401

exf_types.add_type("monotone_nash.ExperimentConfig", ExperimentConfig)
exf_types.add_type("monotone_nash.RunSummary", RunSummary)


@fn.NodeDecorator(
    node_id="mnash.exp.simulate",
    name="Simulate",
    description="Independent replications of the payoff-based learner.",
    outputs=[
        {"name": "runs", "type": pd.DataFrame},
        {"name": "summary", "type": pd.DataFrame},
    ],
)
def exp_simulate(
    game: GameName = GameName.BILINEAR,
    replications: int = 20,
    max_iters: int = 5000,
    base_seed: int = 0,
    regularized: bool = True,
    mu0: Optional[np.ndarray] = None,
    a: float = 5 / 9,
    b: float = 5 / 27,
    c: float = 1 / 27,
    thinning: Optional[int] = None,
) -> Tuple[pd.DataFrame, pd.DataFrame]:
    config = ExperimentConfig(
        game=GameName.v(game),
        a=a,
        b=b,
        c=c,
        mu0=mu0,
        max_iters=int(max_iters),
        replications=int(replications),
        base_seed=int(base_seed),
        regularized=regularized,
        thinning=thinning,
    )
    result = run_experiment(config)
    return result.runs, result.summary_frame()


@fn.NodeDecorator(
    node_id="mnash.exp.median_distance",
    name="Median Distance",
    description="Median distance to the reference equilibrium over replications, per iteration.",
    outputs=[{"name": "median", "type": pd.DataFrame}],
)
def exp_median_distance(runs: pd.DataFrame) -> pd.DataFrame:
    return median_distance(runs).reset_index()


@fn.NodeDecorator(
    node_id="mnash.exp.to_csv",
    name="Runs to CSV",
    description="Serializes a runs table with 17 significant digits.",
    outputs=[{"name": "csv", "type": str}],
)
def exp_to_csv(runs: pd.DataFrame) -> str:
    return frame_to_bytes(runs).decode("utf-8")


@fn.NodeDecorator(
    node_id="mnash.exp.from_csv",
    name="Runs from CSV",
    description="Parses and validates a runs CSV.",
    outputs=[{"name": "runs", "type": pd.DataFrame}],
)
def exp_from_csv(csv: str) -> pd.DataFrame:
    return parse_runs_csv(csv)


@fn.NodeDecorator(
    node_id="mnash.exp.plot",
    name="Plot Runs",
    description="SVG of the median mean trajectories with quartile bands.",
    outputs=[{"name": "svg", "type": str}],
)
def exp_plot(runs: pd.DataFrame) -> str:
    return plot_runs(runs)


EXPERIMENT_SHELF = fn.Shelf(
    nodes=[exp_simulate, exp_median_distance, exp_to_csv, exp_from_csv, exp_plot],
    name="Experiments",
    description="Replicated simulations, run files and plots",
    subshelves=[],
)
