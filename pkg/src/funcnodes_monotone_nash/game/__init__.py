from typing import Tuple

import exposedfunctionality.function_parser.types as exf_types
import funcnodes as fn
import numpy as np

from .._types import GameName
from ._model import (  # noqa: F401
    BoxSet,
    GameDefinition,
    as_joint_action,
    batch_cost,
    batch_gradient,
    check_player,
    eval_cost,
    eval_game_mapping,
    finite_difference_mapping,
    project,
    project_joint,
)
from ._registry import (  # noqa: F401
    GAME_REGISTRY,
    bilinear,
    kinked,
    quadratic_strong,
    registry,
    registry_names,
    shifted_sum,
)
from ._diagnostics import (  # noqa: F401
    check_monotone,
    estimate_lipschitz,
    nash_gap,
    sample_box,
)

exf_types.add_type("monotone_nash.GameDefinition", GameDefinition)
exf_types.add_type("monotone_nash.BoxSet", BoxSet)


@fn.NodeDecorator(
    node_id="mnash.game.get",
    name="Game",
    description="Returns a built-in game from the registry.",
    outputs=[{"name": "game", "type": GameDefinition}],
)
def game_get(name: GameName = GameName.BILINEAR) -> GameDefinition:
    return registry(GameName.v(name))


@fn.NodeDecorator(
    node_id="mnash.game.cost",
    name="Cost",
    description="Evaluates the cost of one player at a joint action.",
    outputs=[{"name": "cost", "type": float}],
)
def game_cost(game: GameDefinition, player: int, action: np.ndarray) -> float:
    return eval_cost(game, player, action)


@fn.NodeDecorator(
    node_id="mnash.game.mapping",
    name="Game Mapping",
    description="Evaluates the stacked game mapping (partial gradients of own costs).",
    outputs=[{"name": "mapping", "type": np.ndarray}],
)
def game_mapping(
    game: GameDefinition,
    action: np.ndarray,
    finite_difference: bool = False,
) -> np.ndarray:
    return eval_game_mapping(game, action, allow_finite_difference=finite_difference)


@fn.NodeDecorator(
    node_id="mnash.game.project",
    name="Project",
    description="Projects a vector onto the action set of a player.",
    outputs=[{"name": "projected", "type": np.ndarray}],
)
def game_project(game: GameDefinition, player: int, vector: np.ndarray) -> np.ndarray:
    return project(game.action_sets[check_player(game, player)], vector)


@fn.NodeDecorator(
    node_id="mnash.game.reference",
    name="Reference Equilibrium",
    description="Returns the reference Nash equilibrium and action bounds of a game.",
    outputs=[
        {"name": "equilibrium", "type": np.ndarray},
        {"name": "lower", "type": np.ndarray},
        {"name": "upper", "type": np.ndarray},
    ],
)
def game_reference(game: GameDefinition) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    ref = game.reference_equilibrium
    return (None if ref is None else ref.copy()), game.lower, game.upper


@fn.NodeDecorator(
    node_id="mnash.game.check_monotone",
    name="Check Monotone",
    description="Smallest sampled inner product (M(x) - M(y), x - y) over the action box.",
    outputs=[{"name": "min_inner", "type": float}],
)
def game_check_monotone(
    game: GameDefinition, n_pairs: int = 10_000, seed: int = 0
) -> float:
    return check_monotone(game, n_pairs=int(n_pairs), seed=int(seed))


@fn.NodeDecorator(
    node_id="mnash.game.nash_gap",
    name="Nash Gap",
    description="Largest unilateral improvement per player found by a grid scan.",
    outputs=[{"name": "gap", "type": np.ndarray}],
)
def game_nash_gap(game: GameDefinition, action: np.ndarray, grid: int = 1000) -> np.ndarray:
    return nash_gap(game, action, grid=int(grid))


GAME_SHELF = fn.Shelf(
    nodes=[
        game_get,
        game_cost,
        game_mapping,
        game_project,
        game_reference,
        game_check_monotone,
        game_nash_gap,
    ],
    name="Games",
    description="Game definitions, game mapping and projections",
    subshelves=[],
)
