from typing import Optional

import numpy as np

from ..errors import UsageError
from ..utils import make_rng
from ._model import (
    ArrayLike,
    GameDefinition,
    as_joint_action,
    batch_gradient,
    eval_game_mapping,
)


def sample_box(
    game: GameDefinition, rng: np.random.Generator, n: int, fallback: float = 1.0
) -> np.ndarray:
    """Uniform samples from the joint action box, shape ``(n, N, d)``.

    Unbounded sides are cut at ``+-fallback`` around the finite bound (or 0).
    """
    lower, upper = game.lower.copy(), game.upper.copy()
    lower_inf, upper_inf = ~np.isfinite(lower), ~np.isfinite(upper)
    lower[lower_inf] = np.where(upper_inf[lower_inf], -fallback, upper[lower_inf] - 2 * fallback)
    upper[upper_inf] = lower[upper_inf] + 2 * fallback
    return rng.uniform(lower, upper, size=(n,) + game.shape)


def _stacked_mapping(game: GameDefinition, xs: np.ndarray) -> np.ndarray:
    if game.analytic_gradient is not None and game.vectorized:
        return np.concatenate(
            [batch_gradient(game, i, xs) for i in range(game.n_players)], axis=1
        )
    return np.stack([eval_game_mapping(game, x, allow_finite_difference=True) for x in xs])


def _mapping_pairs(game: GameDefinition, n_pairs: int, seed: int):
    rng = make_rng(seed)
    xs = sample_box(game, rng, n_pairs)
    ys = sample_box(game, rng, n_pairs)
    mx, my = _stacked_mapping(game, xs), _stacked_mapping(game, ys)
    dx = (xs - ys).reshape(n_pairs, -1)
    return mx - my, dx


def check_monotone(game: GameDefinition, n_pairs: int = 10_000, seed: int = 0) -> float:
    """Minimum of ``(M(x) - M(y), x - y)`` over random pairs of the action box."""
    dm, dx = _mapping_pairs(game, n_pairs, seed)
    return float(np.min(np.einsum("ij,ij->i", dm, dx)))


def _steepest_pair(game: GameDefinition, seed: int):
    """Pair along the top singular direction of the unit secant matrix at a random point.

    For an affine mapping the ratio of this pair is the exact operator norm.
    """
    base = sample_box(game, make_rng([seed, 1]), 1)[0]
    n = base.size
    m0 = _stacked_mapping(game, base[None])[0]
    secant = (_stacked_mapping(game, base + np.eye(n).reshape((n,) + game.shape)) - m0).T
    direction = np.linalg.svd(secant)[2][0]
    dm = _stacked_mapping(game, (base + direction.reshape(game.shape))[None])[0] - m0
    return dm, direction


def estimate_lipschitz(game: GameDefinition, n_pairs: int = 256, seed: int = 0) -> float:
    """Largest sampled ``||M(x) - M(y)|| / ||x - y||``.

    Random pairs are joined by one pair along the steepest secant direction,
    so affine mappings get their exact constant instead of a lower bound.
    """
    dm, dx = _mapping_pairs(game, n_pairs, seed)
    steep_dm, steep_dx = _steepest_pair(game, seed)
    dm, dx = np.vstack([dm, steep_dm]), np.vstack([dx, steep_dx])
    dist = np.linalg.norm(dx, axis=1)
    ok = dist > 1e-12
    if not np.any(ok):
        return 0.0
    return float(np.max(np.linalg.norm(dm[ok], axis=1) / dist[ok]))


def nash_gap(
    game: GameDefinition, a: ArrayLike, grid: int = 1000, players: Optional[list[int]] = None
) -> np.ndarray:
    """Per player, the largest unilateral cost improvement found on a grid of its interval.

    Only defined for bounded one-dimensional action sets.
    """
    if game.dim != 1 or not game.bounded:
        raise UsageError("nash_gap needs bounded one-dimensional action sets")
    a = as_joint_action(game, a)
    players = list(range(game.n_players)) if players is None else players
    gaps = np.zeros(len(players))
    for n, i in enumerate(players):
        box = game.action_sets[i]
        candidates = np.linspace(box.lower[0], box.upper[0], grid)
        current = float(game.cost(i, a))
        best = current
        for value in candidates:
            trial = a.copy()
            trial[i, 0] = value
            best = min(best, float(game.cost(i, trial)))
        gaps[n] = current - best
    return gaps
