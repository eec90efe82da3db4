import dataclasses

import funcnodes as fn

# import funcnodes_numpy to register the types
import funcnodes_numpy as fnnp  # noqa: F401
import numpy as np
import pandas as pd
from exposedfunctionality.function_parser.types import type_to_string

from .errors import (
    CapabilityError,
    ConvergenceError,
    MonotoneNashError,
    NonFinitePayoffError,
    UsageError,
)
from .game import (
    BoxSet,
    GameDefinition,
    GAME_SHELF,
    eval_game_mapping,
    project,
    registry,
    game_get,
    game_cost,
    game_mapping,
    game_project,
    game_reference,
    game_check_monotone,
    game_nash_gap,
)
from .schedules import (
    ScheduleExponents,
    ScheduleState,
    DEFAULT_EXPONENTS,
    SCHEDULE_SHELF,
    validate_exponents,
    partial_sum_check,
    sched_values,
    sched_validate,
    sched_partial_sums,
    sched_table,
)
from .learner import (
    IterationRecord,
    LearnerConfig,
    LearnerState,
    LEARNER_SHELF,
    run,
    step,
    learn_run,
)
from .smoothing import (
    BiasVarianceReport,
    GradientEstimate,
    SmoothedQuery,
    SMOOTHING_SHELF,
    score_gradient,
    mixed_mapping,
    smoothed_cost,
    bias_report,
    smooth_cost,
    smooth_gradient,
    smooth_compare,
    smooth_bias_report,
)
from .solvers import (
    SolverSettings,
    TikhonovPath,
    TikhonovPoint,
    SOLVER_SHELF,
    solve_tikhonov,
    tikhonov_path,
    solve_vi,
    solve_tikhonov_node,
    solve_path_node,
    solve_vi_node,
    linear_equilibrium_node,
)
from .experiment import (
    ExperimentConfig,
    RunSummary,
    EXPERIMENT_SHELF,
    run_experiment,
    exp_simulate,
    exp_median_distance,
    exp_to_csv,
    exp_from_csv,
    exp_plot,
)

_DATACLASS_TYPES = [
    BoxSet,
    ScheduleExponents,
    ScheduleState,
    IterationRecord,
    GradientEstimate,
    BiasVarianceReport,
    TikhonovPoint,
    SolverSettings,
    RunSummary,
]


def encode_monotone_nash(obj, preview=False):
    if isinstance(obj, GameDefinition):
        return fn.Encdata(
            {
                "name": obj.name,
                "n_players": obj.n_players,
                "dim": obj.dim,
                "lower": obj.lower.tolist(),
                "upper": obj.upper.tolist(),
                "description": obj.description,
            },
            handeled=True,
        )
    if isinstance(obj, TikhonovPath):
        return fn.Encdata(obj.to_frame().to_dict(orient="split"), handeled=True)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        data = {}
        for f in dataclasses.fields(obj):
            value = getattr(obj, f.name)
            if isinstance(value, np.ndarray):
                value = value.tolist()
            data[f.name] = value
        return fn.Encdata(data, handeled=True)
    return fn.Encdata(obj, handeled=False)


fn.JSONEncoder.add_encoder(encode_monotone_nash, [GameDefinition, TikhonovPath] + _DATACLASS_TYPES)


NODE_SHELF = fn.Shelf(
    nodes=[],
    subshelves=[
        GAME_SHELF,
        SCHEDULE_SHELF,
        LEARNER_SHELF,
        SMOOTHING_SHELF,
        SOLVER_SHELF,
        EXPERIMENT_SHELF,
    ],
    name="Monotone Nash",
    description="Payoff-based learning of Nash equilibria in monotone games",
)

FUNCNODES_RENDER_OPTIONS: fn.RenderOptions = {
    "typemap": {
        type_to_string(pd.DataFrame): "table",
    },
}

__version__ = "0.1.0"

__all__ = [
    "NODE_SHELF",
    "GAME_SHELF",
    "SCHEDULE_SHELF",
    "LEARNER_SHELF",
    "SMOOTHING_SHELF",
    "SOLVER_SHELF",
    "EXPERIMENT_SHELF",
    # errors
    "MonotoneNashError",
    "UsageError",
    "CapabilityError",
    "NonFinitePayoffError",
    "ConvergenceError",
    # end errors
    # game
    "BoxSet",
    "GameDefinition",
    "registry",
    "eval_game_mapping",
    "project",
    "game_get",
    "game_cost",
    "game_mapping",
    "game_project",
    "game_reference",
    "game_check_monotone",
    "game_nash_gap",
    # end game
    # schedules
    "ScheduleExponents",
    "ScheduleState",
    "DEFAULT_EXPONENTS",
    "validate_exponents",
    "partial_sum_check",
    "sched_values",
    "sched_validate",
    "sched_partial_sums",
    "sched_table",
    # end schedules
    # learner
    "LearnerConfig",
    "LearnerState",
    "IterationRecord",
    "run",
    "step",
    "learn_run",
    # end learner
    # smoothing
    "SmoothedQuery",
    "GradientEstimate",
    "BiasVarianceReport",
    "smoothed_cost",
    "score_gradient",
    "mixed_mapping",
    "bias_report",
    "smooth_cost",
    "smooth_gradient",
    "smooth_compare",
    "smooth_bias_report",
    # end smoothing
    # solvers
    "SolverSettings",
    "TikhonovPoint",
    "TikhonovPath",
    "solve_tikhonov",
    "tikhonov_path",
    "solve_vi",
    "solve_tikhonov_node",
    "solve_path_node",
    "solve_vi_node",
    "linear_equilibrium_node",
    # end solvers
    # experiment
    "ExperimentConfig",
    "RunSummary",
    "run_experiment",
    "exp_simulate",
    "exp_median_distance",
    "exp_to_csv",
    "exp_from_csv",
    "exp_plot",
    # end experiment
]
